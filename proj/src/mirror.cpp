#include "gammaflag/mirror.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>

#include "gammaflag/schubert.hpp"

namespace gammaflag::mirror {

namespace {

Rational rat_pow(const Rational& x, int e) { return ipow(x, e); }

}  // namespace

MirrorSpace::MirrorSpace(const lie::FlagSpace& X_) : X(X_) {
  if (X.rs.datum.type_letter != 'A')
    throw UnsupportedSpace(std::string("mirror matrices are implemented in type A only, got type ") +
                           X.rs.datum.type_letter);
  n = X.rank() + 1;
  pinned = X.W.words[X.P.wP];
  wP_word_inverse.assign(pinned.rbegin(), pinned.rend());
}

std::vector<std::vector<int>> MirrorSpace::words(std::size_t cap) const {
  return lie::reduced_words(X.W, X.P.wP, cap);
}

template <class T>
std::vector<T> MirrorSpace::torus(const std::vector<T>& q) const {
  if ((int)q.size() != X.ndiv()) throw std::invalid_argument("torus: need one q per divisor");
  std::vector<T> alpha(n - 1, T(1));
  for (int k = 0; k < X.ndiv(); ++k) alpha[X.P.divisors[k]] = q[k];
  std::vector<T> t(n, T(1));
  for (int k = n - 2; k >= 0; --k) t[k] = t[k + 1] * alpha[k];
  return t;
}

template <class T>
GroupElement<T> twist_map(const MirrorSpace& M, const GroupElement<T>& x) {
  auto f = ldu(x * wbar<T>(M.n, M.wP_word_inverse));
  return iota(f.lower * f.torus);
}

template <class T>
GroupElement<T> chart_plus(const MirrorSpace& M, const std::vector<T>& q, const std::vector<T>& a,
                           const std::vector<int>& word) {
  auto x = GroupElement<T>::identity(M.n);
  for (std::size_t k = 0; k < word.size(); ++k) x = x * x_gen<T>(M.n, word[k], a[k]);
  return diag(M.torus(q)) * twist_map(M, x);
}

template <class T>
GroupElement<T> chart_minus(const MirrorSpace& M, const std::vector<T>& q,
                            const std::vector<T>& a, const std::vector<int>& word) {
  auto x = diag(M.torus(q));
  for (std::size_t k = 0; k < word.size(); ++k)
    x = x * y_gen<T>(M.n, word[k], a[k]) * coroot_gen<T>(M.n, word[k], T(1) / a[k]);
  return x;
}

template <class T>
CrystalParts<T> crystal_decompose(const MirrorSpace& M, const GroupElement<T>& x) {
  auto wb = wbar<T>(M.n, M.pinned);
  auto wbi = inverse(wb);
  auto f = ldu(wbi * x);
  return {wb * f.lower * wbi, wb * f.torus * wbi, f.upper};
}

#define GF_INSTANTIATE(T)                                                                       \
  template std::vector<T> MirrorSpace::torus<T>(const std::vector<T>&) const;                   \
  template GroupElement<T> twist_map<T>(const MirrorSpace&, const GroupElement<T>&);            \
  template GroupElement<T> chart_plus<T>(const MirrorSpace&, const std::vector<T>&,             \
                                         const std::vector<T>&, const std::vector<int>&);       \
  template GroupElement<T> chart_minus<T>(const MirrorSpace&, const std::vector<T>&,            \
                                          const std::vector<T>&, const std::vector<int>&);      \
  template CrystalParts<T> crystal_decompose<T>(const MirrorSpace&, const GroupElement<T>&);
GF_INSTANTIATE(Rational)
GF_INSTANTIATE(double)
GF_INSTANTIATE(cplx)
#undef GF_INSTANTIATE

std::vector<double> weight_map_chart(const MirrorSpace& M, const std::vector<double>& q,
                                     const std::vector<double>& a, const std::vector<int>& word) {
  auto d = M.torus(q);
  auto betas = lie::beta_sequence(M.X.rs, M.X.W, word);
  for (std::size_t k = 0; k < betas.size(); ++k)
    for (int p = 0; p < M.n; ++p) {
      int e = (p < M.r() ? betas[k][p] : 0) - (p > 0 ? betas[k][p - 1] : 0);
      if (e) d[p] *= std::pow(a[k], e);
    }
  return d;
}

double phi(const GroupElement<double>& x, int i) { return x(i + 1, i) / x(i, i); }
double eps(const GroupElement<double>& x, int i) { return phi(x, i) * x(i, i) / x(i + 1, i + 1); }

GroupElement<double> e_action(const GroupElement<double>& x, int i, double c) {
  return x_gen(x.n, i, (c - 1) / phi(x, i)) * x * x_gen(x.n, i, (1 / c - 1) / eps(x, i));
}

GroupElement<double> s_action(const GroupElement<double>& x, int i) {
  return e_action(x, i, x(i + 1, i + 1) / x(i, i));
}

GroupElement<double> gm_action(const GroupElement<double>& x, double c) {
  std::vector<double> r(x.n), ri(x.n);
  for (int k = 0; k < x.n; ++k) {
    r[k] = std::pow(c, x.n - 1 - k);
    ri[k] = 1 / r[k];
  }
  return diag(r) * x * diag(ri);
}

YForm yform_from_chart_minus(const MirrorSpace& M, const std::vector<double>& q,
                             const std::vector<double>& a, const std::vector<int>& word) {
  YForm y;
  y.t = M.torus(q);
  for (std::size_t k = 0; k < word.size(); ++k) {
    int i = word[k];
    y.a.push_back(a[k] * y.t[i + 1] / y.t[i]);
    y.t[i] /= a[k];
    y.t[i + 1] *= a[k];
  }
  return y;
}

GroupElement<double> yform_matrix(const YForm& y, const std::vector<int>& word) {
  int n = (int)y.t.size();
  auto x = GroupElement<double>::identity(n);
  for (std::size_t k = 0; k < word.size(); ++k) x = x * y_gen(n, word[k], y.a[k]);
  return x * diag(y.t);
}

YForm e_action_coords(const YForm& y, const std::vector<int>& word, int i, double c) {
  int L = (int)word.size(), n = (int)y.t.size();
  double total = 0;
  for (int k = 0; k < L; ++k)
    if (word[k] == i) total += y.a[k];
  // running torus tau = prod alpha_i^vee(b_m) over processed m
  std::vector<double> tau(n, 1.0);
  YForm out;
  out.a.resize(L);
  double before = 0;
  for (int k = 0; k < L; ++k) {
    int j = word[k];
    double ak = y.a[k];
    if (j == i) {
      double after = total - before - ak;
      double num = c * before + (total - before), den = c * (before + ak) + after;
      ak = ak * num / den;
      out.a[k] = ak * tau[j + 1] / tau[j];
      double b = den / num;
      tau[i] *= b;
      tau[i + 1] /= b;
      before += y.a[k];
    } else {
      out.a[k] = ak * tau[j + 1] / tau[j];
    }
  }
  out.t.resize(n);
  for (int p = 0; p < n; ++p) out.t[p] = tau[p] * y.t[p];
  return out;
}

YForm s_action_coords(const YForm& y, const std::vector<int>& word, int i) {
  return e_action_coords(y, word, i, y.t[i + 1] / y.t[i]);
}

// ---------------------------------------------------------------- potential

std::vector<std::pair<double, std::vector<int>>> ChartPotential::terms(
    const std::vector<double>& q) const {
  std::map<std::vector<int>, double> acc;
  for (int k = 0; k < ell; ++k) {
    std::vector<int> e(ell, 0);
    e[k] = 1;
    acc[e] += 1;
  }
  for (std::size_t j = 0; j < P.size(); ++j)
    for (const auto& [m, c] : P[j].terms()) acc[m] += q[j] * to_double(c);
  std::vector<std::pair<double, std::vector<int>>> out;
  for (auto& [m, c] : acc)
    if (c != 0) out.push_back({c, m});
  return out;
}

cplx ChartPotential::eval(const std::vector<double>& q, const std::vector<cplx>& a) const {
  cplx s = 0;
  for (int k = 0; k < ell; ++k) s += a[k];
  for (std::size_t j = 0; j < P.size(); ++j) s += q[j] * P[j].eval(a);
  return s;
}

namespace {

// Coefficients of the polynomial of degree < N through (m+1, vals[m]).
std::vector<std::vector<Rational>> vandermonde_inverse(int N) {
  std::vector<std::vector<Rational>> V(N, std::vector<Rational>(2 * N, 0));
  for (int i = 0; i < N; ++i) {
    Rational p = 1;
    for (int j = 0; j < N; ++j) {
      V[i][j] = p;
      p *= (i + 1);
    }
    V[i][N + i] = 1;
  }
  for (int c = 0; c < N; ++c) {
    int p = c;
    while (V[p][c] == 0) ++p;
    std::swap(V[p], V[c]);
    Rational inv = 1 / V[c][c];
    for (auto& x : V[c]) x *= inv;
    for (int r = 0; r < N; ++r) {
      if (r == c || V[r][c] == 0) continue;
      Rational f = V[r][c];
      for (int j = 0; j < 2 * N; ++j) V[r][j] -= f * V[c][j];
    }
  }
  std::vector<std::vector<Rational>> out(N, std::vector<Rational>(N));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) out[i][j] = V[i][N + j];
  return out;
}

// Interpolates g (a Laurent polynomial with exponents in [-D, D]) exactly.
Poly interpolate_laurent(int ell, int D, const std::function<Rational(const std::vector<Rational>&)>& g) {
  int N = 2 * D + 1;
  std::size_t total = 1;
  for (int k = 0; k < ell; ++k) total *= N;
  std::vector<Rational> vals(total);
  std::vector<int> idx(ell, 0);
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t rem = lin;
    std::vector<Rational> pt(ell);
    Rational mono = 1;
    for (int k = ell - 1; k >= 0; --k) {
      idx[k] = int(rem % N);
      rem /= N;
      pt[k] = idx[k] + 1;
      mono *= rat_pow(pt[k], D);
    }
    vals[lin] = g(pt) * mono;
  }
  auto Vi = vandermonde_inverse(N);
  // transform one axis at a time; axis k has stride N^(ell-1-k)
  std::size_t stride = total;
  for (int k = 0; k < ell; ++k) {
    stride /= N;
    std::vector<Rational> next(total);
    for (std::size_t lin = 0; lin < total; ++lin) {
      std::size_t pos = (lin / stride) % N, base = lin - pos * stride;
      Rational s = 0;
      for (int m = 0; m < N; ++m)
        if (Vi[pos][m] != 0) s += Vi[pos][m] * vals[base + m * stride];
      next[lin] = s;
    }
    vals.swap(next);
  }
  Poly out(ell);
  for (std::size_t lin = 0; lin < total; ++lin) {
    if (vals[lin] == 0) continue;
    std::size_t rem = lin;
    Monomial m(ell);
    for (int k = ell - 1; k >= 0; --k) {
      m[k] = int(rem % N) - D;
      rem /= N;
    }
    out += Poly::term(ell, m, vals[lin]);
  }
  return out;
}

}  // namespace

ChartPotential chart_potential(const MirrorSpace& M, const std::vector<int>& word) {
  int ell = (int)word.size();
  if (ell != M.ell()) throw std::invalid_argument("chart_potential: word is not a reduced word of w_P");
  if (ell > 6) throw UnsupportedSpace("chart potential interpolation is limited to ell <= 6");
  ChartPotential F;
  F.word = word;
  F.ell = ell;
  int m = M.X.ndiv();
  auto f_at = [&](const std::vector<Rational>& q, const std::vector<Rational>& a) -> Rational {
    return Rational(superpotential(M, chart_plus<Rational>(M, q, a, word)));
  };
  std::vector<Rational> ones(m, 1);
  std::vector<std::vector<Rational>> probes = {
      std::vector<Rational>(ell, 0), std::vector<Rational>(ell, 0)};
  for (int k = 0; k < ell; ++k) {
    probes[0][k] = Rational(7 + 2 * k, 3 + k);
    probes[1][k] = Rational(2 + k, 11 + 3 * k);
    probes[0][k].canonicalize();
    probes[1][k].canonicalize();
  }
  for (int j = 0; j < m; ++j) {
    auto qj = ones;
    qj[j] = 2;
    auto g = [&](const std::vector<Rational>& a) -> Rational { return f_at(qj, a) - f_at(ones, a); };
    bool ok = false;
    for (int D = 2; D <= 4 && !ok; ++D) {
      Poly P = interpolate_laurent(ell, D, g);
      ok = true;
      for (const auto& pr : probes)
        if (P.eval(pr) != g(pr)) ok = false;
      if (ok) F.P.push_back(P);
    }
    if (!ok) throw std::runtime_error("chart_potential: interpolation did not close");
  }
  // the linear part of f is sum a_k: check it exactly at the probes
  for (const auto& pr : probes) {
    Rational s = 0;
    for (auto& x : pr) s += x;
    for (const auto& P : F.P) s += P.eval(pr);
    if (s != f_at(ones, pr)) throw std::runtime_error("chart_potential: linear part mismatch");
  }
  F.positive = true;
  for (const auto& P : F.P)
    for (const auto& [mm, c] : P.terms())
      if (c <= 0) F.positive = false;
  return F;
}

nlohmann::json CriticalPoint::to_json() const {
  std::vector<std::vector<double>> H(hessian.rows(), std::vector<double>(hessian.cols()));
  for (int i = 0; i < hessian.rows(); ++i)
    for (int j = 0; j < hessian.cols(); ++j) H[i][j] = hessian(i, j);
  return {{"a", a}, {"f", f}, {"hessian_log", H}, {"grad_norm", grad_norm}, {"iterations", iterations}};
}

namespace {

struct TermTable {
  int ell = 0;
  std::vector<double> c;
  Eigen::MatrixXd E;  // exponents, one row per term

  TermTable(const ChartPotential& F, const std::vector<double>& q) : ell(F.ell) {
    auto t = F.terms(q);
    c.resize(t.size());
    E.resize(t.size(), ell);
    for (std::size_t k = 0; k < t.size(); ++k) {
      c[k] = t[k].first;
      for (int j = 0; j < ell; ++j) E(k, j) = t[k].second[j];
    }
  }
  double value(const Eigen::VectorXd& x) const {
    Eigen::VectorXd ex = E * x;
    double s = 0;
    for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * std::exp(ex[k]);
    return s;
  }
  void grad_hess(const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
    Eigen::VectorXd ex = E * x;
    g = Eigen::VectorXd::Zero(ell);
    H = Eigen::MatrixXd::Zero(ell, ell);
    for (std::size_t k = 0; k < c.size(); ++k) {
      double w = c[k] * std::exp(ex[k]);
      Eigen::VectorXd e = E.row(k).transpose();
      g += w * e;
      H += w * e * e.transpose();
    }
  }
};

}  // namespace

CriticalPoint critical_point(const ChartPotential& F, const std::vector<double>& q,
                             const std::vector<double>& shift) {
  TermTable T(F, q);
  int ell = F.ell;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(ell);
  for (std::size_t k = 0; k < shift.size(); ++k) s[k] = shift[k];
  auto obj = [&](const Eigen::VectorXd& x) { return T.value(x) - s.dot(x); };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(ell), g;
  Eigen::MatrixXd H;
  CriticalPoint cp;
  for (int it = 0; it < 500; ++it) {
    T.grad_hess(x, g, H);
    g -= s;
    cp.iterations = it;
    double scale = 1 + T.value(x);
    if (g.norm() < 1e-14 * scale) break;
    Eigen::VectorXd d = -H.ldlt().solve(g);
    if (!d.allFinite()) throw std::runtime_error("critical_point: singular Hessian");
    double f0 = obj(x), step = 1;
    while (step > 1e-12 && !(obj(x + step * d) <= f0 + 1e-4 * step * g.dot(d))) step /= 2;
    Eigen::VectorXd xn = x + step * d;
    if ((xn - x).norm() < 1e-16 * (1 + x.norm())) break;
    x = xn;
  }
  T.grad_hess(x, g, H);
  cp.grad_norm = (g - s).norm();
  cp.x.assign(x.data(), x.data() + ell);
  for (double v : cp.x) cp.a.push_back(std::exp(v));
  cp.f = T.value(x);
  cp.hessian = H;
  return cp;
}

namespace {

std::vector<cplx> poly_roots(std::vector<cplx> c) {  // c[k] x^k
  while (!c.empty() && std::abs(c.back()) == 0) c.pop_back();
  int d = (int)c.size() - 1;
  if (d < 1) return {};
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) C(i, i - 1) = 1;
  for (int i = 0; i < d; ++i) C(i, d - 1) = -c[i] / c[d];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
  // polish
  for (auto& z : r)
    for (int it = 0; it < 4; ++it) {
      cplx p = 0, dp = 0;
      for (int k = d; k >= 0; --k) {
        dp = dp * z + p;
        p = p * z + c[k];
      }
      if (std::abs(dp) > 0) z -= p / dp;
    }
  return r;
}

// Multiplies by a monomial to clear negative exponents and strips common factors.
Poly clear_monomial(const Poly& p) {
  int nv = p.nvars();
  Monomial lo(nv, 0);
  for (int v = 0; v < nv; ++v) lo[v] = p.min_degree_in(v);
  Poly out(nv);
  for (const auto& [m, c] : p.terms()) {
    Monomial e = m;
    for (int v = 0; v < nv; ++v) e[v] -= lo[v];
    out += Poly::term(nv, e, c);
  }
  return out;
}

// Coefficients in var 1 of p(a0, a1) at fixed a0.
template <class T>
std::vector<T> coeffs_in_second(const Poly& p, const T& a0) {
  std::vector<T> c(p.degree_in(1) + 1, T(0));
  for (const auto& [m, co] : p.terms()) c[m[1]] += from_rational<T>(co) * ipow(a0, m[0]);
  return c;
}

Rational rat_det(std::vector<std::vector<Rational>> A) {
  int n = (int)A.size();
  Rational det = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    while (p < n && A[p][c] == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(A[p], A[c]);
      det = -det;
    }
    det *= A[c][c];
    for (int r = c + 1; r < n; ++r) {
      if (A[r][c] == 0) continue;
      Rational f = A[r][c] / A[c][c];
      for (int j = c; j < n; ++j) A[r][j] -= f * A[c][j];
    }
  }
  return det;
}

Rational sylvester_resultant(const std::vector<Rational>& f, const std::vector<Rational>& g) {
  int m = (int)f.size() - 1, n = (int)g.size() - 1;
  int N = m + n;
  std::vector<std::vector<Rational>> S(N, std::vector<Rational>(N, 0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= m; ++k) S[i][i + k] = f[m - k];
  for (int i = 0; i < m; ++i)
    for (int k = 0; k <= n; ++k) S[n + i][i + k] = g[n - k];
  return rat_det(S);
}

}  // namespace

std::vector<cplx> complex_critical_values(const ChartPotential& F, const std::vector<double>& q) {
  int ell = F.ell;
  if (ell > 2) throw UnsupportedSpace("complex critical values are implemented for ell <= 2");
  // exact potential at rational q (q given as doubles; exact when dyadic)
  Poly P(ell);
  for (int k = 0; k < ell; ++k) P += Poly::variable(ell, k);
  for (std::size_t j = 0; j < F.P.size(); ++j) P += F.P[j] * Rational(q[j]);
  auto Fval = [&](const std::vector<cplx>& a) {
    return F.eval(q, a);
  };
  std::vector<cplx> values;
  if (ell == 1) {
    Poly G = clear_monomial(P.euler(0));
    std::vector<cplx> c(G.degree_in(0) + 1, 0.0);
    for (const auto& [m, co] : G.terms()) c[m[0]] += to_double(co);
    for (auto z : poly_roots(c))
      if (std::abs(z) > 1e-12) values.push_back(Fval({z}));
    return values;
  }
  Poly G1 = clear_monomial(P.euler(0)), G2 = clear_monomial(P.euler(1));
  int bound = G1.degree_in(1) * G2.degree_in(0) + G2.degree_in(1) * G1.degree_in(0);
  std::vector<Rational> rv;
  for (int p = 0; p <= bound; ++p) {
    Rational a0 = p + 1;
    rv.push_back(sylvester_resultant(coeffs_in_second<Rational>(G1, a0),
                                     coeffs_in_second<Rational>(G2, a0)));
  }
  auto Vi = vandermonde_inverse(bound + 1);
  std::vector<cplx> rc(bound + 1, 0.0);
  bool nonzero = false;
  for (int i = 0; i <= bound; ++i) {
    Rational s = 0;
    for (int j = 0; j <= bound; ++j) s += Vi[i][j] * rv[j];
    rc[i] = to_double(s);
    nonzero = nonzero || s != 0;
  }
  if (!nonzero) throw std::runtime_error("complex_critical_values: degenerate resultant");
  std::vector<std::vector<cplx>> pts;
  for (auto z0 : poly_roots(rc)) {
    if (std::abs(z0) < 1e-10) continue;
    for (auto z1 : poly_roots(coeffs_in_second<cplx>(G1, z0))) {
      if (std::abs(z1) < 1e-10) continue;
      // Newton on (G1, G2)
      cplx a = z0, b = z1;
      for (int it = 0; it < 30; ++it) {
        std::vector<cplx> pt = {a, b};
        cplx g1 = G1.eval(pt), g2 = G2.eval(pt);
        cplx j11 = G1.derivative(0).eval(pt), j12 = G1.derivative(1).eval(pt);
        cplx j21 = G2.derivative(0).eval(pt), j22 = G2.derivative(1).eval(pt);
        cplx det = j11 * j22 - j12 * j21;
        if (std::abs(det) == 0) break;
        a -= (j22 * g1 - j12 * g2) / det;
        b -= (-j21 * g1 + j11 * g2) / det;
      }
      std::vector<cplx> pt = {a, b};
      double res = std::abs(G1.eval(pt)) + std::abs(G2.eval(pt));
      double sc = 1 + std::abs(a) + std::abs(b);
      if (res > 1e-8 * std::pow(sc, 4)) continue;
      bool dup = false;
      for (auto& o : pts) dup = dup || std::abs(o[0] - a) + std::abs(o[1] - b) < 1e-7 * sc;
      if (!dup) pts.push_back(pt);
    }
  }
  for (auto& p : pts) values.push_back(Fval(p));
  return values;
}

// ---------------------------------------------------------------- integrals

IBResult ib_integral(const MirrorSpace& M, const ChartPotential& F, double hbar,
                     const std::vector<cplx>& h, const std::vector<double>& q, int k,
                     const IBOptions& opt) {
  if (!(hbar > 0)) throw std::invalid_argument("ib_integral needs hbar > 0");
  int ell = F.ell;
  auto betas = lie::beta_sequence(M.X.rs, M.X.W, F.word);
  std::vector<cplx> expo(ell);
  std::vector<double> shift(ell);
  for (int j = 0; j < ell; ++j) {
    expo[j] = schubert::coroot_value(M.X.rs, betas[j], h) / hbar;
    shift[j] = expo[j].real() * hbar;
  }
  cplx pre = 0;
  for (int j = 0; j < M.X.ndiv(); ++j) pre += h[M.X.P.divisors[j]] * std::log(q[j]) / hbar;

  TermTable T(F, q);
  auto cp = critical_point(F, q, shift);
  Eigen::VectorXd xs = Eigen::Map<Eigen::VectorXd>(cp.x.data(), ell);
  double phimax = -cp.f / hbar;
  for (int j = 0; j < ell; ++j) phimax += expo[j].real() * cp.x[j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cp.hessian / hbar);
  Eigen::MatrixXd B = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  double jac = B.determinant();

  // exponents of the terms and of the h-part, affine in u
  int nt = (int)T.c.size();
  Eigen::MatrixXd EB = T.E * B;
  Eigen::VectorXd e0 = T.E * xs;
  Eigen::VectorXcd ex(ell);
  for (int j = 0; j < ell; ++j) ex[j] = expo[j];
  Eigen::RowVectorXcd lin = ex.transpose() * B.cast<cplx>();
  cplx lin0 = 0;
  for (int j = 0; j < ell; ++j) lin0 += expo[j] * xs[j];
  auto integrand = [&](const double* u) -> cplx {
    double f = 0;
    for (int t = 0; t < nt; ++t) {
      double e = e0[t];
      for (int j = 0; j < ell; ++j) e += EB(t, j) * u[j];
      f += T.c[t] * std::exp(e);
    }
    cplx ph = lin0 - f / hbar - phimax;
    for (int j = 0; j < ell; ++j) ph += lin[j] * u[j];
    if (ph.real() < -745) return 0;
    cplx v = std::exp(ph);
    if (k) v *= std::pow(f, k);
    return v;
  };

  IBResult res;
  res.log_scale = phimax + pre.real();
  cplx phase = std::exp(cplx(0, pre.imag())) * std::abs(jac);

  if (ell >= 5) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd(0.0, 1.5);
    double norm = std::pow(2 * M_PI * 1.5 * 1.5, 0.5 * ell);
    cplx sum = 0;
    double sum2 = 0;
    int N = opt.mc_samples;
    Eigen::VectorXd u(ell);
    for (int s = 0; s < N; ++s) {
      double q2 = 0;
      for (int j = 0; j < ell; ++j) {
        u[j] = nd(rng);
        q2 += u[j] * u[j];
      }
      cplx w = integrand(u.data()) * norm * std::exp(q2 / (2 * 1.5 * 1.5));
      sum += w;
      sum2 += std::norm(w);
    }
    cplx mean = sum / double(N);
    double var = sum2 / N - std::norm(mean);
    res.value_scaled = mean * phase;
    res.error = std::sqrt(std::max(var, 0.0) / N) / std::max(std::abs(mean), 1e-300);
    res.status = "monte_carlo";
    return res;
  }

  // Hessian-scaled coordinates u = L0 sinh(v): exponential tails of the bump
  // become double-exponential in v.
  const auto& gl = gauss_legendre(opt.nodes);
  const double L0 = 3;
  // panels of fixed width anchored at v = 0, so growing the box only adds tails
  auto run = [&](int K) {
    std::vector<double> nodes, weights;
    for (int p = -K; p < K; ++p) {
      double c = (p + 0.5) * opt.panel;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        double v = c + 0.5 * opt.panel * gl.nodes[i];
        nodes.push_back(L0 * std::sinh(v));
        weights.push_back(0.5 * opt.panel * gl.weights[i] * L0 * std::cosh(v));
      }
    }
    int N = (int)nodes.size();
    std::vector<cplx> part(N, 0.0);
    parallel_for(N, [&](int i0) {
      std::vector<double> u(ell);
      std::vector<int> idx(ell, 0);
      idx[0] = i0;
      cplx acc = 0;
      while (true) {
        double wt = 1;
        for (int j = 0; j < ell; ++j) {
          u[j] = nodes[idx[j]];
          wt *= weights[idx[j]];
        }
        acc += wt * integrand(u.data());
        int j = ell - 1;
        while (j >= 1 && ++idx[j] == N) idx[j--] = 0;
        if (j < 1) break;
      }
      part[i0] = acc;
    });
    cplx s = 0;
    for (auto v : part) s += v;
    return s;
  };
  int K = std::max(1, int(std::ceil(std::asinh(opt.start_box / L0) / opt.panel)));
  int Kmax = int(std::ceil(std::asinh(opt.max_box / L0) / opt.panel));
  int dK = std::max(1, int(std::ceil(1 / opt.panel)));
  cplx prev = run(K);
  res.status = "box_limit";
  while (K < Kmax) {
    K += dK;
    cplx cur = run(K);
    double ch = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    prev = cur;
    res.error = ch;
    if (ch < opt.tol) {
      res.status = "converged";
      break;
    }
  }
  res.value_scaled = prev * phase;
  return res;
}

IBResult torus_integral(const MirrorSpace& M, const ChartPotential& F, double hbar,
                        const std::vector<double>& q, int k, int nodes) {
  (void)M;
  int ell = F.ell;
  if (ell > 2) throw UnsupportedSpace("torus_integral is implemented for ell <= 2");
  std::size_t total = 1;
  for (int j = 0; j < ell; ++j) total *= nodes;
  std::vector<cplx> fv(total);
  double top = -INFINITY;
  for (std::size_t lin = 0; lin < total; ++lin) {
    std::size_t rem = lin;
    std::vector<cplx> a(ell);
    for (int j = 0; j < ell; ++j) {
      a[j] = std::polar(1.0, 2 * M_PI * double(rem % nodes) / nodes);
      rem /= nodes;
    }
    fv[lin] = F.eval(q, a);
    top = std::max(top, -fv[lin].real() / hbar);
  }
  cplx s = 0;
  for (auto f : fv) {
    cplx v = std::exp(-f / hbar - top);
    if (k) v *= std::pow(f, k);
    s += v;
  }
  IBResult r;
  r.log_scale = top;
  r.value_scaled = s * std::pow(cplx(0, 2 * M_PI / nodes), ell);
  r.status = "trapezoid";
  return r;
}

nlohmann::json StationaryPhaseReport::to_json() const {
  return {{"hbar", hbar},   {"ratio", ratio},   {"slope", slope},
          {"max_dev_small", max_dev_small}, {"passes", passes}};
}

StationaryPhaseReport stationary_phase_check(const MirrorSpace& M, const ChartPotential& F,
                                             const std::vector<double>& q,
                                             const std::vector<double>& hbar_grid) {
  StationaryPhaseReport rep;
  auto cp = critical_point(F, q);
  double ell = F.ell, det = cp.hessian.determinant();
  std::vector<double> xs, ys;
  std::vector<cplx> h(M.r(), 0.0);
  for (double hb : hbar_grid) {
    auto r = ib_integral(M, F, hb, h, q, 0);
    double v = std::abs(r.value_scaled) * std::exp(r.log_scale + cp.f / hb);
    double lead = std::pow(2 * M_PI * hb, ell / 2) / std::sqrt(det);
    rep.hbar.push_back(hb);
    rep.ratio.push_back(v / lead);
    if (hb <= 0.05) {
      rep.max_dev_small = std::max(rep.max_dev_small, std::abs(v / lead - 1));
      xs.push_back(std::log(hb));
      ys.push_back(std::log(v));
    }
  }
  if (xs.size() >= 2) {
    rep.slope = fit_line(xs, ys).slope;
    rep.passes = rep.max_dev_small < 0.02 && std::abs(rep.slope - ell / 2) < 0.05;
  }
  return rep;
}

namespace {

std::vector<cplx> mir_point(const MirrorSpace& M, const std::vector<cplx>& h,
                            const std::vector<double>& q, double hbar) {
  std::vector<cplx> pt(h.begin(), h.end());
  for (double v : q) pt.push_back(v);
  pt.push_back(-hbar);
  (void)M;
  return pt;
}

// sum_k c[v][k] I_k over the given integrals, with a common scale.
flat::ScaledVec combine(const flat::MirInverse& Mi, const std::vector<IBResult>& I,
                        const std::vector<cplx>& pt, double pref) {
  int n = (int)Mi.c.size();
  double top = -INFINITY;
  for (auto& r : I) top = std::max(top, r.log_scale);
  flat::ScaledVec out;
  out.v = VecC::Zero(n);
  out.log_scale = top;
  for (int v = 0; v < n; ++v)
    for (std::size_t k = 0; k < I.size() && k < Mi.c[v].size(); ++k)
      if (!Mi.c[v][k].is_zero())
        out.v[v] += pref * Mi.c[v][k].eval(pt) * I[k].value_scaled * std::exp(I[k].log_scale - top);
  return out;
}

}  // namespace

flat::FlatSection gamma_section(const MirrorSpace& M, const ChartPotential& F,
                                const flat::MirInverse& Mi, const std::vector<double>& q) {
  if (!Mi.complete) throw std::invalid_argument("gamma_section: Mir inverse is " + Mi.status);
  flat::FlatSection s;
  s.provenance = "integral";
  s.eval = [&M, &F, &Mi, q](double hbar) {
    std::vector<cplx> h(M.r(), 0.0);
    std::vector<IBResult> I;
    for (int k = 0; k <= F.ell; ++k) I.push_back(ib_integral(M, F, hbar, h, q, k));
    return combine(Mi, I, mir_point(M, h, q, hbar), std::pow(hbar, -0.5 * F.ell));
  };
  return s;
}

flat::FlatSection torus_section(const MirrorSpace& M, const ChartPotential& F,
                                const flat::MirInverse& Mi, const std::vector<double>& q) {
  if (!Mi.complete) throw std::invalid_argument("torus_section: Mir inverse is " + Mi.status);
  flat::FlatSection s;
  s.provenance = "integral";
  s.eval = [&M, &F, &Mi, q](double hbar) {
    std::vector<cplx> h(M.r(), 0.0);
    std::vector<IBResult> I;
    for (int k = 0; k <= F.ell; ++k) I.push_back(torus_integral(M, F, hbar, q, k));
    return combine(Mi, I, mir_point(M, h, q, hbar), std::pow(hbar, -0.5 * F.ell));
  };
  return s;
}

cplx ib_dual(const MirrorSpace& M, const ChartPotential& F, const flat::MirInverse& Mi, int v,
             double hbar, const std::vector<cplx>& h, const std::vector<double>& q,
             const IBOptions& opt) {
  if (!Mi.complete) throw std::invalid_argument("ib_dual: Mir inverse is " + Mi.status);
  auto pt = mir_point(M, h, q, hbar);
  cplx s = 0;
  for (int k = 0; k <= F.ell && k < (int)Mi.c[v].size(); ++k) {
    if (Mi.c[v][k].is_zero()) continue;
    s += Mi.c[v][k].eval(pt) * ib_integral(M, F, hbar, h, q, k, opt).value();
  }
  return s;
}

}  // namespace gammaflag::mirror
