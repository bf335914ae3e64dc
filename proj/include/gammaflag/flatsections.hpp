#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gammaflag/gammaclass.hpp"
#include "gammaflag/numerics.hpp"
#include "gammaflag/poly.hpp"
#include "gammaflag/qh.hpp"

namespace gammaflag::flat {

using RMat = std::vector<std::vector<Rational>>;
using qh::QConnection;
using schubert::Schubert;

// q_j d/dq_j v = A_j(q) v with A_j(q) = sum_nu A_{j,nu} q^nu.
// Exact systems carry rational matrices; numeric systems complex ones.
struct FrobeniusSystem {
  int dim = 0, mv = 0;
  std::map<Monomial, std::vector<MatC>> A;         // A[nu][j]
  std::map<Monomial, std::vector<RMat>> A_exact;   // filled in exact mode
  bool exact = false;

  // A_nu = sum_j A_{j,nu}
  MatC summed(const Monomial& nu) const;
  // Largest commutator norm among the A_{j,0}.
  double commutator_defect() const;
};

class ResonanceError : public std::runtime_error {
 public:
  ResonanceError(const std::string& msg, cplx a, cplx b, int k)
      : std::runtime_error(msg), mu_a(a), mu_b(b), shift(k) {}
  cplx mu_a, mu_b;
  int shift;
};

class RadiusError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Fundamental solution (sum_nu S_nu q^nu) exp(sum_j log q_j A_{j,0}).
struct SeriesSolution {
  int dim = 0, mv = 0, order = 0;
  std::map<Monomial, MatC> S;
  std::map<Monomial, RMat> S_exact;
  std::vector<MatC> A0;  // A_{j,0}

  MatC series(const std::vector<cplx>& q) const;
  MatC log_part(const std::vector<cplx>& q) const;
  MatC eval(const std::vector<cplx>& q) const { return series(q) * log_part(q); }
  // Norm ratio of the last two homogeneous shells at q.
  double tail_ratio(const std::vector<cplx>& q) const;
  // Max over directions j and orders of the per-direction recurrence residual.
  double direction_residual(const FrobeniusSystem& sys) const;
};

// Solves the recurrence up to total order N. Throws ResonanceError when an
// eigenvalue difference of A_0 is within 1e-9 of an integer in [1, N].
SeriesSolution frobenius_solve(const FrobeniusSystem& sys, int N);
// Exact-mode check: the summed recurrence holds with zero remainder.
bool recurrence_exact(const FrobeniusSystem& sys, const SeriesSolution& sol);

struct FundamentalOptions {
  int order = 40;
  double radius = 0.5;  // max |h|/hbar
};

// Frobenius system of the quantum connection in q at fixed (hbar, h):
// A_{j,nu} = -(1/hbar) [q^nu] C_j(h).
FrobeniusSystem quantum_system(const QConnection& Q, cplx hbar, const std::vector<cplx>& h);
FrobeniusSystem quantum_system_exact(const QConnection& Q, const Rational& hbar,
                                     const std::vector<Rational>& h);
SeriesSolution fundamental_solution(const QConnection& Q, cplx hbar, const std::vector<cplx>& h,
                                    const FundamentalOptions& opt = {});
// max_i |(q_i d/dq_i + C_i/hbar) S| / |S| by central differences at q.
double flatness_residual(const QConnection& Q, const SeriesSolution& sol, cplx hbar,
                         const std::vector<cplx>& h, const std::vector<cplx>& q);

// The connection pulled back to q_i = s^{n_i}: one variable s.
FrobeniusSystem anticanonical_system(const QConnection& Q, cplx hbar, const std::vector<cplx>& h);

// J(s) at hbar = -1, h = 0: J_v = <S sigma^v, 1>, the last row of S.
// Components are value * exp(log_scale).
struct JValue {
  double s = 0;
  std::vector<double> comps;  // by position in W^P
  double log_scale = 0;
  std::string method;         // "series" or "ode"
};

struct JOptions {
  int order = 60;
  double switch_s = 1.0;  // series below, ODE continuation above
  double rtol = 1e-12;
};

class JFunction {
 public:
  explicit JFunction(const QConnection& Q, JOptions opt = {});
  // Values on an increasing grid of s > 0, one ODE pass.
  std::vector<JValue> eval(std::vector<double> s_grid) const;
  JValue eval(double s) const { return eval(std::vector<double>{s})[0]; }
  int top() const { return top_; }

 private:
  const QConnection* Q_;
  JOptions opt_;
  FrobeniusSystem sys_;
  SeriesSolution sol_;
  double E_;
  int top_;
  std::vector<Eigen::MatrixXd> Ak_;  // A(s) = sum_k s^k Ak_[k]
};

struct GammaLimit {
  std::vector<double> estimate, error, target;  // by position
  double max_distance = 0;                      // vs gamma_class coefficients
  std::string status;                           // "converged" | "inconclusive"
  std::vector<double> s_grid;
  std::vector<std::vector<double>> ratios;      // [grid index][position]
  nlohmann::json to_json() const;
};

// J/<pd[pt], J> on the grid, with Aitken acceleration of the last values.
GammaLimit gamma_limit(const QConnection& Q, const std::vector<double>& s_grid,
                       const JOptions& opt = {});

struct IAOptions {
  int order = 60;
  double radius = 0.5;
};

// I^A(hbar, h, q, y) = hbar^{ell/2} int S (hbar^{-mu} hbar^{c1} Gamma-hat) cup y,
// with y given by numeric Schubert coefficients at h.
cplx ia_integral(const QConnection& Q, const gammaclass::GammaClass& G, double hbar,
                 const std::vector<cplx>& h, const std::vector<cplx>& q,
                 const std::vector<cplx>& y, const IAOptions& opt = {});
// Closed form of the leading term: hbar^{-(2rho-2rho_P)(h)/hbar} prod Gamma(alpha(h)/hbar).
cplx ia_limit_closed_form(const Schubert& S, double hbar, const std::vector<cplx>& h);
// lambda(h) = sum_k lambda_k omega_{div k}(h)
cplx lambda_pairing(const Schubert& S, const std::vector<int>& lambda, const std::vector<cplx>& h);

// Vector times exp(log_scale).
struct ScaledVec {
  VecC v;
  double log_scale = 0;
};

struct FlatSection {
  std::function<ScaledVec(double hbar)> eval;
  std::string provenance;  // "series" | "ode" | "integral"
};

// Residual of (d/dhbar - c1*_{q=1}/hbar^2 + mu/hbar) s, relative to |s|.
double hbar_residual(const QConnection& Q, const FlatSection& s, double hbar);

struct AsymptoticReport {
  bool passes = false;
  double slope = 0, intercept = 0, rms = 0;
  double max_section_residual = 0;
  std::vector<double> grid;
  std::vector<double> log_norms;
  std::string notice;
  nlohmann::json to_json() const;
};

struct AsymptoticOptions {
  double rms_tol = 0.05;
  double slope_bound = 50;
  double residual_tol = 1e-8;
  int residual_samples = 3;
};

AsymptoticReport asymptotic_class_test(const QConnection& Q, const FlatSection& s, double E,
                                       const std::vector<double>& hbar_grid,
                                       const AsymptoticOptions& opt = {});

// Mir([f^k omega]) = A_k in variables (h, q, hbar), and sigma^v = sum_k c[v][k] A_k.
struct MirInverse {
  int nvars = 0;  // r + m + 1; hbar is the last variable
  std::vector<std::vector<Poly>> A;  // A[k][w]
  std::vector<std::vector<Poly>> c;  // c[v][k]
  bool complete = false;
  std::string status;
};
MirInverse mir_inverse_on_c1_span(const QConnection& Q, int k_max = -1);

}  // namespace gammaflag::flat
