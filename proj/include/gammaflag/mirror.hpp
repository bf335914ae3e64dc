#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "gammaflag/flatsections.hpp"
#include "gammaflag/lie.hpp"
#include "gammaflag/numerics.hpp"
#include "gammaflag/poly.hpp"

namespace gammaflag::mirror {

class UnsupportedSpace : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class CellError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Square matrix over Rational, double or cplx, standing for an element of
// PGL_n: equality of group elements is up to a scalar.
template <class T>
struct GroupElement {
  int n = 0;
  std::vector<T> m;  // row-major

  GroupElement() = default;
  explicit GroupElement(int n_) : n(n_), m(std::size_t(n_) * n_, T(0)) {}
  static GroupElement identity(int n) {
    GroupElement g(n);
    for (int i = 0; i < n; ++i) g(i, i) = T(1);
    return g;
  }
  T& operator()(int i, int j) { return m[std::size_t(i) * n + j]; }
  const T& operator()(int i, int j) const { return m[std::size_t(i) * n + j]; }
  GroupElement operator*(const GroupElement& o) const {
    GroupElement r(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        if ((*this)(i, k) == T(0)) continue;
        for (int j = 0; j < n; ++j) r(i, j) += (*this)(i, k) * o(k, j);
      }
    return r;
  }
  bool is_lower() const {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((*this)(i, j) != T(0)) return false;
    return true;
  }
};

template <class T>
double abs_of(const T& x) {
  if constexpr (std::is_same_v<T, Rational>)
    return std::abs(to_double(x));
  else
    return std::abs(x);
}

// Generators (0-based i acts on rows/columns i, i+1).
template <class T>
GroupElement<T> x_gen(int n, int i, const T& a) {
  auto g = GroupElement<T>::identity(n);
  g(i, i + 1) = a;
  return g;
}
template <class T>
GroupElement<T> y_gen(int n, int i, const T& a) {
  auto g = GroupElement<T>::identity(n);
  g(i + 1, i) = a;
  return g;
}
// alpha_i^vee(c)
template <class T>
GroupElement<T> coroot_gen(int n, int i, const T& c) {
  auto g = GroupElement<T>::identity(n);
  g(i, i) = c;
  g(i + 1, i + 1) = T(1) / c;
  return g;
}
template <class T>
GroupElement<T> sbar(int n, int i) {
  return x_gen<T>(n, i, T(-1)) * y_gen<T>(n, i, T(1)) * x_gen<T>(n, i, T(-1));
}
// wbar for a reduced word (0-based letters)
template <class T>
GroupElement<T> wbar(int n, const std::vector<int>& word) {
  auto g = GroupElement<T>::identity(n);
  for (int i : word) g = g * sbar<T>(n, i);
  return g;
}
template <class T>
GroupElement<T> diag(const std::vector<T>& d) {
  GroupElement<T> g((int)d.size());
  for (int i = 0; i < g.n; ++i) g(i, i) = d[i];
  return g;
}

template <class T>
struct Triangular {
  GroupElement<T> lower, torus, upper;  // unipotent lower, diagonal, unipotent upper
};

// g = L D U; throws CellError on a vanishing leading principal minor.
template <class T>
Triangular<T> ldu(const GroupElement<T>& g) {
  int n = g.n;
  double scale = 0;
  for (const auto& v : g.m) scale = std::max(scale, abs_of(v));
  GroupElement<T> A = g;
  auto L = GroupElement<T>::identity(n), U = GroupElement<T>::identity(n);
  GroupElement<T> D(n);
  for (int k = 0; k < n; ++k) {
    T p = A(k, k);
    bool zero;
    if constexpr (std::is_same_v<T, Rational>)
      zero = p == 0;
    else
      zero = abs_of(p) <= 1e-13 * scale;
    if (zero) throw CellError("vanishing leading principal minor at " + std::to_string(k + 1));
    D(k, k) = p;
    for (int i = k + 1; i < n; ++i) L(i, k) = A(i, k) / p;
    for (int j = k + 1; j < n; ++j) U(k, j) = A(k, j) / p;
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j) A(i, j) -= L(i, k) * p * U(k, j);
  }
  return {L, D, U};
}

template <class T>
GroupElement<T> antidiagonal_flip(const GroupElement<T>& g) {
  GroupElement<T> r(g.n);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) r(i, j) = g(g.n - 1 - i, g.n - 1 - j);
  return r;
}

// g = u_plus t u_minus (u_plus unipotent upper, u_minus unipotent lower).
template <class T>
Triangular<T> gauss_decompose(const GroupElement<T>& g) {
  auto f = ldu(antidiagonal_flip(g));
  // J g J = L D U  =>  g = (J L J)(J D J)(J U J)
  return {antidiagonal_flip(f.upper), antidiagonal_flip(f.torus), antidiagonal_flip(f.lower)};
}

// Inverse of a triangular or general matrix by Gauss-Jordan.
template <class T>
GroupElement<T> inverse(const GroupElement<T>& g) {
  int n = g.n;
  GroupElement<T> A = g, I = GroupElement<T>::identity(n);
  for (int c = 0; c < n; ++c) {
    int p = c;
    double best = -1;
    for (int r = c; r < n; ++r) {
      double v = abs_of(A(r, c));
      if constexpr (std::is_same_v<T, Rational>) {
        if (A(r, c) != 0) {
          p = r;
          best = 1;
          break;
        }
      } else if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best <= 0) throw CellError("singular matrix");
    for (int j = 0; j < n; ++j) {
      std::swap(A(c, j), A(p, j));
      std::swap(I(c, j), I(p, j));
    }
    T inv = T(1) / A(c, c);
    for (int j = 0; j < n; ++j) {
      A(c, j) *= inv;
      I(c, j) *= inv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c || A(r, c) == T(0)) continue;
      T f = A(r, c);
      for (int j = 0; j < n; ++j) {
        A(r, j) -= f * A(c, j);
        I(r, j) -= f * I(c, j);
      }
    }
  }
  return I;
}

// The anti-automorphism with iota(x_i(a)) = x_i(a), iota(y_i(a)) = y_i(a),
// iota(t) = t^{-1}: g -> D g^{-1} D with D = diag((-1)^k).
template <class T>
GroupElement<T> iota(const GroupElement<T>& g) {
  auto r = inverse(g);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      if ((i + j) % 2) r(i, j) = -r(i, j);
  return r;
}

// Equality in PGL_n.
template <class T>
double projective_distance(const GroupElement<T>& a, const GroupElement<T>& b) {
  int n = a.n;
  int bi = 0;
  for (int k = 1; k < n * n; ++k)
    if (abs_of(a.m[k]) > abs_of(a.m[bi])) bi = k;
  if (abs_of(b.m[bi]) == 0) return INFINITY;
  double worst = 0, sc = 0;
  for (int k = 0; k < n * n; ++k) {
    auto d = a.m[k] * b.m[bi] - b.m[k] * a.m[bi];
    worst = std::max(worst, abs_of(d));
    sc = std::max(sc, abs_of(a.m[k] * b.m[bi]));
  }
  return sc == 0 ? worst : worst / sc;
}

// Type A data attached to a flag space.
struct MirrorSpace {
  lie::FlagSpace X;
  int n = 0;                // matrix size r + 1
  std::vector<int> pinned;  // reduced word i0 of w_P (0-based)
  std::vector<int> wP_word_inverse;

  explicit MirrorSpace(const lie::FlagSpace& X);
  int ell() const { return X.P.ell; }
  int r() const { return X.rank(); }
  // All reduced words of w_P.
  std::vector<std::vector<int>> words(std::size_t cap = 1000) const;
  // t in Z(L_P) from q_k = alpha_{div k}(t): diagonal with last entry 1.
  template <class T>
  std::vector<T> torus(const std::vector<T>& q) const;
};

// Crystal maps on explicit matrices.
template <class T>
std::vector<T> alpha_values(const GroupElement<T>& t) {
  std::vector<T> a(t.n - 1);
  for (int i = 0; i + 1 < t.n; ++i) a[i] = t(i, i) / t(i + 1, i + 1);
  return a;
}

template <class T>
GroupElement<T> twist_map(const MirrorSpace& M, const GroupElement<T>& x);
template <class T>
GroupElement<T> chart_plus(const MirrorSpace& M, const std::vector<T>& q, const std::vector<T>& a,
                           const std::vector<int>& word);
// t x_{-i_1}(a_1) ... x_{-i_l}(a_l) with x_{-i}(a) = y_i(a) alpha_i^vee(1/a)
template <class T>
GroupElement<T> chart_minus(const MirrorSpace& M, const std::vector<T>& q,
                            const std::vector<T>& a, const std::vector<int>& word);

template <class T>
struct CrystalParts {
  GroupElement<T> u1, t, u2;  // x = u1 t wbar_P u2
};
template <class T>
CrystalParts<T> crystal_decompose(const MirrorSpace& M, const GroupElement<T>& x);
template <class T>
T chi(const GroupElement<T>& u) {
  T s(0);
  for (int i = 0; i + 1 < u.n; ++i) s += u(i, i + 1);
  return s;
}
template <class T>
T superpotential(const MirrorSpace& M, const GroupElement<T>& x) {
  auto p = crystal_decompose(M, x);
  return chi(p.u1) + chi(p.u2);
}
// gamma(x): diagonal of x in B^-
template <class T>
GroupElement<T> weight_map(const GroupElement<T>& x) {
  GroupElement<T> g(x.n);
  for (int i = 0; i < x.n; ++i) g(i, i) = x(i, i);
  return g;
}
// t prod_k beta_k^vee(a_k), diagonal entries
std::vector<double> weight_map_chart(const MirrorSpace& M, const std::vector<double>& q,
                                     const std::vector<double>& a, const std::vector<int>& word);

// Crystal operations.
double phi(const GroupElement<double>& x, int i);
double eps(const GroupElement<double>& x, int i);
GroupElement<double> e_action(const GroupElement<double>& x, int i, double c);
GroupElement<double> s_action(const GroupElement<double>& x, int i);
// rho^vee(c) x rho^vee(c)^{-1}
GroupElement<double> gm_action(const GroupElement<double>& x, double c);

// y-form x = y_{i_1}(a'_1) ... y_{i_l}(a'_l) t' and its coordinate update.
struct YForm {
  std::vector<double> a;  // a'
  std::vector<double> t;  // diagonal of t'
};
YForm yform_from_chart_minus(const MirrorSpace& M, const std::vector<double>& q,
                             const std::vector<double>& a, const std::vector<int>& word);
GroupElement<double> yform_matrix(const YForm& y, const std::vector<int>& word);
YForm e_action_coords(const YForm& y, const std::vector<int>& word, int i, double c);
YForm s_action_coords(const YForm& y, const std::vector<int>& word, int i);

// f o Theta_i(t, a) = sum a_k + sum_k q_k P_k(a), recovered exactly.
struct ChartPotential {
  std::vector<int> word;
  int ell = 0;
  std::vector<Poly> P;  // per divisor, Laurent in a_1..a_l
  bool positive = false;
  // Terms of F at given q: coefficient and exponent vector.
  std::vector<std::pair<double, std::vector<int>>> terms(const std::vector<double>& q) const;
  cplx eval(const std::vector<double>& q, const std::vector<cplx>& a) const;
};
ChartPotential chart_potential(const MirrorSpace& M, const std::vector<int>& word);

struct CriticalPoint {
  std::vector<double> a, x;  // x = log a
  double f = 0;
  Eigen::MatrixXd hessian;   // in log coordinates
  double grad_norm = 0;
  int iterations = 0;
  nlohmann::json to_json() const;
};
// Minimizes F(e^x) - <shift, x> (shift = 0 gives the critical point of f).
CriticalPoint critical_point(const ChartPotential& F, const std::vector<double>& q,
                             const std::vector<double>& shift = {});
// Complex critical values of f on the fiber, with multiplicity; ell <= 2.
std::vector<cplx> complex_critical_values(const ChartPotential& F, const std::vector<double>& q);

struct IBOptions {
  int nodes = 10;             // Gauss-Legendre nodes per panel
  double panel = 0.4;         // panel width in the sinh-mapped variable
  double tol = 1e-12;         // relative increment for box growth
  double start_box = 8;       // half-width in Hessian units
  double max_box = 1e4;
  int mc_samples = 400000;    // ell >= 5
  unsigned seed = 12345;
};

struct IBResult {
  cplx value_scaled = 0;  // value = value_scaled * exp(log_scale)
  double log_scale = 0;
  double error = 0;       // relative
  std::string status;
  cplx value() const { return value_scaled * std::exp(log_scale); }
};

// int over the positive part of f^k e^{-f/hbar} gamma^{h/hbar} omega in the chart.
IBResult ib_integral(const MirrorSpace& M, const ChartPotential& F, double hbar,
                     const std::vector<cplx>& h, const std::vector<double>& q, int k,
                     const IBOptions& opt = {});
// Same integrand over the unit torus |a_k| = 1 (a non-positive cycle), ell <= 2.
IBResult torus_integral(const MirrorSpace& M, const ChartPotential& F, double hbar,
                        const std::vector<double>& q, int k, int nodes = 512);

struct StationaryPhaseReport {
  std::vector<double> hbar, ratio;  // e^{f*/hbar} I^B / ((2 pi hbar)^{l/2} / sqrt det H)
  double slope = 0;                 // of log(e^{f*/hbar} I^B) vs log hbar
  double max_dev_small = 0;         // max |ratio - 1| over hbar <= 0.05
  bool passes = false;
  nlohmann::json to_json() const;
};
StationaryPhaseReport stationary_phase_check(const MirrorSpace& M, const ChartPotential& F,
                                             const std::vector<double>& q,
                                             const std::vector<double>& hbar_grid);

// hbar^{-l/2} sum_v I^B(Mir^{-1} sigma^v) sigma_v at h = 0 over the positive part,
// or over the unit torus.
flat::FlatSection gamma_section(const MirrorSpace& M, const ChartPotential& F,
                                const flat::MirInverse& Mi, const std::vector<double>& q);
flat::FlatSection torus_section(const MirrorSpace& M, const ChartPotential& F,
                                const flat::MirInverse& Mi, const std::vector<double>& q);
// I^B(hbar, h, t, Mir^{-1} sigma^v) for numeric h.
cplx ib_dual(const MirrorSpace& M, const ChartPotential& F, const flat::MirInverse& Mi, int v,
             double hbar, const std::vector<cplx>& h, const std::vector<double>& q,
             const IBOptions& opt = {});

}  // namespace gammaflag::mirror
