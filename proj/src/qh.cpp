#include "gammaflag/qh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace gammaflag::qh {

std::vector<int> QConnection::grading() const {
  std::vector<int> w(r, 1);
  for (int k = 0; k < m; ++k) w.push_back(c1_pairing[k]);
  return w;
}

std::vector<Poly> quantum_chevalley(const Schubert& S, int k, int v) {
  const auto& X = S.space();
  const auto& W = X.W;
  const auto& rs = X.rs;
  const auto& P = X.P;
  int r = X.rank(), m = X.ndiv(), nv = r + m;
  int i = P.divisors.at(k);
  int ve = P.WP.at(v);
  std::vector<Poly> col(S.n(), Poly(nv));

  // classical diagonal term -(v omega_i)(h)
  std::vector<Rational> lin(nv, 0);
  const auto& Rinv = W.root_action[W.inverse[ve]];
  for (int j = 0; j < r; ++j) lin[j] = -Rinv(i, j);
  col[v] += Poly::linear(nv, lin);

  for (std::size_t b = 0; b < rs.positive_roots.size(); ++b) {
    const auto& beta = rs.positive_roots[b];
    if (lie::root_in_levi(beta, P.IP)) continue;
    int coef = beta[i];
    if (coef == 0) continue;
    int u = W.multiply(ve, lie::reflection(rs, W, (int)b));
    if (W.length[u] == W.length[ve] + 1 && P.pos.count(u)) {
      col[P.position(u)] += Poly::constant(nv, coef);
      continue;
    }
    int ub = lie::min_coset_rep(W, P.IP, u);
    Monomial mono(nv, 0);
    int deg = 0;
    for (int d = 0; d < m; ++d) {
      mono[r + d] = beta[P.divisors[d]];
      deg += mono[r + d] * P.c1_pairing[d];
    }
    if (W.length[ub] == W.length[ve] + 1 - deg) col[P.position(ub)] += Poly::term(nv, mono, coef);
  }
  return col;
}

QConnection build_connection(const Schubert& S) {
  const auto& X = S.space();
  QConnection Q;
  Q.S = &S;
  Q.r = X.rank();
  Q.m = X.ndiv();
  Q.c1_pairing = X.P.c1_pairing;
  int nn = S.n();
  Q.c1 = poly_zero_matrix(nn, Q.nvars());
  for (int k = 0; k < Q.m; ++k) {
    PolyMatrix M = poly_zero_matrix(nn, Q.nvars());
    for (int v = 0; v < nn; ++v) {
      auto col = quantum_chevalley(S, k, v);
      for (int w = 0; w < nn; ++w) M[w][v] = col[w];
    }
    for (int w = 0; w < nn; ++w)
      for (int v = 0; v < nn; ++v)
        if (!M[w][v].is_zero()) Q.c1[w][v] += M[w][v] * Rational(Q.c1_pairing[k]);
    Q.C.push_back(std::move(M));
  }
  std::string g = grading_defect(Q);
  if (!g.empty()) throw std::logic_error("quantum Chevalley degree mismatch: " + g);
  return Q;
}

MatC evaluate(const PolyMatrix& M, const std::vector<cplx>& h, const std::vector<cplx>& q) {
  std::vector<cplx> pt = h;
  pt.insert(pt.end(), q.begin(), q.end());
  int nn = (int)M.size();
  MatC out = MatC::Zero(nn, nn);
  for (int a = 0; a < nn; ++a)
    for (int b = 0; b < nn; ++b)
      if (!M[a][b].is_zero()) out(a, b) = M[a][b].eval(pt);
  return out;
}

std::vector<std::vector<Rational>> evaluate_exact(const PolyMatrix& M,
                                                  const std::vector<Rational>& h,
                                                  const std::vector<Rational>& q) {
  std::vector<Rational> pt = h;
  pt.insert(pt.end(), q.begin(), q.end());
  int nn = (int)M.size();
  std::vector<std::vector<Rational>> out(nn, std::vector<Rational>(nn, 0));
  for (int a = 0; a < nn; ++a)
    for (int b = 0; b < nn; ++b)
      if (!M[a][b].is_zero()) out[a][b] = M[a][b].eval(pt);
  return out;
}

Eigen::MatrixXd c1_matrix(const QConnection& Q, const std::vector<double>& q) {
  std::vector<cplx> h(Q.r, 0.0), qc(q.begin(), q.end());
  return evaluate(Q.c1, h, qc).real();
}

std::string grading_defect(const QConnection& Q) {
  auto wts = Q.grading();
  for (std::size_t k = 0; k < Q.C.size(); ++k)
    for (int w = 0; w < Q.n(); ++w)
      for (int v = 0; v < Q.n(); ++v) {
        const Poly& p = Q.C[k][w][v];
        if (p.is_zero()) continue;
        bool homog = true;
        long d = p.weighted_degree(wts, &homog);
        if (!homog || d != Q.S->length(v) + 1 - Q.S->length(w))
          return "divisor " + std::to_string(k) + " entry (" + std::to_string(w) + "," +
                 std::to_string(v) + ")";
      }
  return "";
}

std::string flatness_defect(const QConnection& Q) {
  int m = Q.m;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      auto AB = poly_matmul(Q.C[a], Q.C[b]);
      auto BA = poly_matmul(Q.C[b], Q.C[a]);
      for (int w = 0; w < Q.n(); ++w)
        for (int v = 0; v < Q.n(); ++v) {
          if (AB[w][v] != BA[w][v])
            return "[C_" + std::to_string(a + 1) + ",C_" + std::to_string(b + 1) + "] != 0";
          if (Q.C[b][w][v].euler(Q.q_var(a)) != Q.C[a][w][v].euler(Q.q_var(b)))
            return "q_i d_i C_j != q_j d_j C_i for (" + std::to_string(a + 1) + "," +
                   std::to_string(b + 1) + ")";
        }
    }
  return "";
}

bool indecomposable(const QConnection& Q) {
  std::vector<double> q(Q.m, 1.0);
  Eigen::MatrixXd M = c1_matrix(Q, q);
  int nn = Q.n();
  for (int s = 0; s < nn; ++s) {
    std::vector<char> seen(nn, 0);
    std::vector<int> st = {s};
    seen[s] = 1;
    while (!st.empty()) {
      int a = st.back();
      st.pop_back();
      for (int b = 0; b < nn; ++b)
        if (!seen[b] && M(b, a) > 0) {
          seen[b] = 1;
          st.push_back(b);
        }
    }
    for (char c : seen)
      if (!c) return false;
  }
  return true;
}

nlohmann::json SpectralReport::to_json() const {
  using nlohmann::json;
  json j;
  j["space"] = space;
  j["q"] = q;
  json ev = json::array();
  for (auto z : eigenvalues) ev.push_back({{"re", z.real()}, {"im", z.imag()}});
  j["eigenvalues"] = ev;
  j["E_O"] = E_O;
  j["multiplicity"] = multiplicity;
  j["gap"] = gap;
  j["gap_real"] = gap_real;
  json mm = json::array();
  for (auto z : max_modulus_set) mm.push_back({{"re", z.real()}, {"im", z.imag()}});
  j["max_modulus_set"] = mm;
  j["status"] = status;
  return j;
}

SpectralReport conjecture_O_certify(const QConnection& Q, const std::vector<double>& q,
                                    double tol) {
  for (double x : q)
    if (!(x > 0)) throw std::invalid_argument("q must be positive real");
  SpectralReport rep;
  rep.space = Q.S->space().label;
  rep.q = q;
  Eigen::MatrixXd M = c1_matrix(Q, q);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen-solver did not converge");
  for (int k = 0; k < M.rows(); ++k) rep.eigenvalues.push_back(es.eigenvalues()(k));
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](cplx a, cplx b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return a.imag() < b.imag();
  });
  double rho = std::abs(rep.eigenvalues.front());
  // the real eigenvalue of maximal modulus
  cplx best = 0;
  bool found = false;
  for (auto z : rep.eigenvalues)
    if (std::abs(z.imag()) <= tol && z.real() > 0 && std::abs(z.real() - rho) <= tol) {
      best = z;
      found = true;
      break;
    }
  rep.E_O = found ? best.real() : rho;
  rep.multiplicity = 0;
  bool ambiguous = false;
  double others = 0, others_re = -1e300;
  for (auto z : rep.eigenvalues) {
    double d = std::abs(z - cplx(rep.E_O, 0));
    if (d <= tol) {
      ++rep.multiplicity;
      continue;
    }
    if (d <= 10 * std::sqrt(tol)) ambiguous = true;
    others = std::max(others, std::abs(z));
    others_re = std::max(others_re, z.real());
    if (std::abs(std::abs(z) - rho) <= tol) rep.max_modulus_set.push_back(z);
  }
  rep.max_modulus_set.insert(rep.max_modulus_set.begin(), cplx(rep.E_O, 0));
  rep.gap = rep.E_O - others;
  rep.gap_real = M.rows() > 1 ? rep.E_O - others_re : rep.E_O;
  if (!found || rep.multiplicity != 1)
    rep.status = ambiguous ? "inconclusive" : "failed";
  else
    rep.status = ambiguous ? "inconclusive" : "certified";
  return rep;
}

PositivePoint schubert_positive_point(const QConnection& Q, const std::vector<double>& q,
                                      int N_cap) {
  const Schubert& S = *Q.S;
  const auto& X = S.space();
  int nn = S.n();
  Eigen::MatrixXd M = c1_matrix(Q, q);
  if (M.minCoeff() < 0) throw std::logic_error("c1 matrix has a negative entry at h = 0");
  PositivePoint pp;
  Eigen::VectorXd term = Eigen::VectorXd::Zero(nn), x;
  term(0) = 1;
  x = term;
  int N = 0;
  while (x.minCoeff() <= 0) {
    if (++N > N_cap)
      throw std::runtime_error("Schubert-positive point: x_N not positive up to N = " +
                               std::to_string(N_cap));
    term = M * term;
    x += term;
  }
  pp.N = N;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
  int best = 0;
  for (int k = 1; k < nn; ++k)
    if (es.eigenvalues()(k).real() > es.eigenvalues()(best).real()) best = k;
  pp.E_O = es.eigenvalues()(best).real();
  Eigen::VectorXcd cc = es.eigenvectors().col(best);
  int big = 0;
  for (int k = 1; k < nn; ++k)
    if (std::abs(cc(k)) > std::abs(cc(big))) big = k;
  cc *= std::conj(cc(big)) / std::abs(cc(big));
  Eigen::VectorXd c = cc.real();
  // refine with a few power steps on the shifted positive matrix
  Eigen::MatrixXd shifted = M + Eigen::MatrixXd::Identity(nn, nn);
  for (int it = 0; it < 5; ++it) {
    c = shifted * c;
    c /= c.norm();
  }
  int top = S.vee(0);
  pp.lambda.resize(nn);
  for (int v = 0; v < nn; ++v) pp.lambda[v] = c(S.vee(v)) / c(top);
  pp.lambda_c1 = 0;
  for (int k = 0; k < Q.m; ++k) {
    int si = X.P.position(X.W.from_word({X.P.divisors[k]}));
    pp.lambda_c1 += Q.c1_pairing[k] * pp.lambda[si];
  }
  std::vector<cplx> h(Q.r, 0.0), qc(q.begin(), q.end());
  for (int k = 0; k < Q.m; ++k) {
    int si = X.P.position(X.W.from_word({X.P.divisors[k]}));
    Eigen::MatrixXd Ck = evaluate(Q.C[k], h, qc).real();
    for (int v = 0; v < nn; ++v) {
      double lhs = 0;
      for (int w = 0; w < nn; ++w) lhs += Ck(w, v) * pp.lambda[w];
      pp.hom_residual = std::max(pp.hom_residual, std::abs(lhs - pp.lambda[si] * pp.lambda[v]));
    }
  }
  return pp;
}

}  // namespace gammaflag::qh
