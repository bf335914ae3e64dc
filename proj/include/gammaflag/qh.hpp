#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gammaflag/numerics.hpp"
#include "gammaflag/poly.hpp"
#include "gammaflag/schubert.hpp"

namespace gammaflag::qh {

using schubert::Schubert;

// Divisor operators C_k = c_1^T(L_{omega_i}) * - for i = divisors[k].
// Polynomials live in r + m variables: h-coordinates x_1..x_r followed by
// q_1..q_m (one per divisor). Matrices act on Schubert coefficient columns:
// C_k sigma_v = sum_w C[k][w][v] sigma_w.
struct QConnection {
  const Schubert* S = nullptr;  // not owned
  int r = 0, m = 0;
  std::vector<int> c1_pairing;  // n_k = <c1, beta_k>
  std::vector<PolyMatrix> C;
  PolyMatrix c1;  // sum_k n_k C_k

  int n() const { return S->n(); }
  int nvars() const { return r + m; }
  int q_var(int k) const { return r + k; }
  // Weights for the grading check (h has weight 1, q_k has weight n_k; both
  // in units of cohomological degree 2).
  std::vector<int> grading() const;
};

// Column of the equivariant quantum Chevalley rule for divisor k and v.
std::vector<Poly> quantum_chevalley(const Schubert& S, int k, int v);
QConnection build_connection(const Schubert& S);

MatC evaluate(const PolyMatrix& M, const std::vector<cplx>& h, const std::vector<cplx>& q);
std::vector<std::vector<Rational>> evaluate_exact(const PolyMatrix& M,
                                                  const std::vector<Rational>& h,
                                                  const std::vector<Rational>& q);
// c1 * at h = 0.
Eigen::MatrixXd c1_matrix(const QConnection& Q, const std::vector<double>& q);

// Exact checks; empty string on success, else a description of the defect.
std::string flatness_defect(const QConnection& Q);
std::string grading_defect(const QConnection& Q);
// Strong connectivity of the support graph of c1 at h = 0, q > 0.
bool indecomposable(const QConnection& Q);

struct SpectralReport {
  std::string space;
  std::vector<double> q;
  std::vector<cplx> eigenvalues;
  double E_O = 0;
  int multiplicity = 0;
  double gap = 0;       // E_O - max modulus of the other eigenvalues
  double gap_real = 0;  // E_O - max real part of the other eigenvalues
  std::vector<cplx> max_modulus_set;
  std::string status;  // "certified", "inconclusive", "failed"
  nlohmann::json to_json() const;
};

SpectralReport conjecture_O_certify(const QConnection& Q, const std::vector<double>& q,
                                    double cluster_tol = 1e-8);

struct PositivePoint {
  std::vector<double> lambda;  // lambda(sigma_v) by position
  int N = 0;                   // power cutoff at which x_N became positive
  double E_O = 0;
  double lambda_c1 = 0;
  double hom_residual = 0;     // max |lambda(sigma_{s_i} * sigma_v) - lambda(s_i) lambda(v)|
};

PositivePoint schubert_positive_point(const QConnection& Q, const std::vector<double>& q,
                                      int N_cap = 1000);

}  // namespace gammaflag::qh
