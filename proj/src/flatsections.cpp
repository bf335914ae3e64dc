#include "gammaflag/flatsections.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

namespace gammaflag::flat {

namespace {

RMat rzero(int n) { return RMat(n, std::vector<Rational>(n, 0)); }

RMat rmul(const RMat& a, const RMat& b) {
  int n = (int)a.size();
  RMat c = rzero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (int j = 0; j < n; ++j)
        if (b[k][j] != 0) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

MatC to_matc(const RMat& a) {
  int n = (int)a.size();
  MatC m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = to_double(a[i][j]);
  return m;
}

int total(const Monomial& m) {
  int s = 0;
  for (int e : m) s += e;
  return s;
}

// All exponent vectors of total degree k in mv variables.
void shell(int mv, int k, std::vector<Monomial>& out) {
  Monomial cur(mv, 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == mv - 1) {
      cur[i] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[i] = e;
      rec(i + 1, left - e);
    }
  };
  if (mv == 0) {
    if (k == 0) out.push_back({});
    return;
  }
  rec(0, k);
}

bool leq(const Monomial& a, const Monomial& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

Monomial minus(const Monomial& a, const Monomial& b) {
  Monomial c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

cplx qpow(const std::vector<cplx>& q, const Monomial& nu) {
  cplx v = 1;
  for (std::size_t j = 0; j < nu.size(); ++j) v *= ipow(q[j], nu[j]);
  return v;
}

void check_resonance(const MatC& A0, int N) {
  Eigen::ComplexEigenSolver<MatC> es(A0);
  auto ev = es.eigenvalues();
  for (int a = 0; a < ev.size(); ++a)
    for (int b = 0; b < ev.size(); ++b) {
      cplx d = ev[a] - ev[b];
      long k = std::lround(d.real());
      if (k >= 1 && k <= N && std::abs(d - double(k)) < 1e-9) {
        std::ostringstream os;
        os << "resonance: eigenvalues " << ev[a] << " and " << ev[b] << " of A_0 differ by " << k;
        throw ResonanceError(os.str(), ev[a], ev[b], (int)k);
      }
    }
}

// Solves k X + X A0 - A0 X = R exactly by elimination on the vectorized system.
RMat sylvester_exact(const RMat& A0, int k, const RMat& R) {
  int n = (int)A0.size(), N = n * n;
  // unknown index i*n + j for X(i,j)
  std::vector<std::vector<Rational>> M(N, std::vector<Rational>(N + 1, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int row = i * n + j;
      M[row][row] += k;
      for (int l = 0; l < n; ++l) {
        if (A0[l][j] != 0) M[row][i * n + l] += A0[l][j];
        if (A0[i][l] != 0) M[row][l * n + j] -= A0[i][l];
      }
      M[row][N] = R[i][j];
    }
  for (int c = 0; c < N; ++c) {
    int p = c;
    while (p < N && M[p][c] == 0) ++p;
    if (p == N) throw std::runtime_error("singular Sylvester operator");
    std::swap(M[p], M[c]);
    Rational inv = 1 / M[c][c];
    for (int j = c; j <= N; ++j) M[c][j] *= inv;
    for (int r = 0; r < N; ++r) {
      if (r == c || M[r][c] == 0) continue;
      Rational f = M[r][c];
      for (int j = c; j <= N; ++j)
        if (M[c][j] != 0) M[r][j] -= f * M[c][j];
    }
  }
  RMat X = rzero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X[i][j] = M[i * n + j][N];
  return X;
}

}  // namespace

MatC FrobeniusSystem::summed(const Monomial& nu) const {
  MatC s = MatC::Zero(dim, dim);
  auto it = A.find(nu);
  if (it != A.end())
    for (const auto& m : it->second) s += m;
  return s;
}

double FrobeniusSystem::commutator_defect() const {
  auto it = A.find(Monomial(mv, 0));
  if (it == A.end()) return 0;
  double d = 0;
  for (int a = 0; a < mv; ++a)
    for (int b = a + 1; b < mv; ++b) {
      const auto &x = it->second[a], &y = it->second[b];
      d = std::max(d, (x * y - y * x).norm());
    }
  return d;
}

SeriesSolution frobenius_solve(const FrobeniusSystem& sys, int N) {
  int n = sys.dim;
  Monomial zero(sys.mv, 0);
  SeriesSolution sol;
  sol.dim = n;
  sol.mv = sys.mv;
  sol.order = N;
  auto it0 = sys.A.find(zero);
  for (int j = 0; j < sys.mv; ++j)
    sol.A0.push_back(it0 == sys.A.end() ? MatC::Zero(n, n) : it0->second[j]);
  MatC A0 = sys.summed(zero);
  check_resonance(A0, N);

  if (sys.exact) {
    RMat A0e = rzero(n);
    std::map<Monomial, RMat> Ae;
    for (const auto& [nu, mats] : sys.A_exact) {
      RMat s = rzero(n);
      for (const auto& m : mats)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s[i][j] += m[i][j];
      if (nu == zero)
        A0e = s;
      else
        Ae[nu] = s;
    }
    RMat id = rzero(n);
    for (int i = 0; i < n; ++i) id[i][i] = 1;
    sol.S_exact[zero] = id;
    for (int k = 1; k <= N; ++k) {
      std::vector<Monomial> sh;
      shell(sys.mv, k, sh);
      for (const auto& nu : sh) {
        RMat R = rzero(n);
        for (const auto& [nu1, A1] : Ae) {
          if (!leq(nu1, nu)) continue;
          auto s2 = sol.S_exact.find(minus(nu, nu1));
          if (s2 == sol.S_exact.end()) continue;
          RMat P = rmul(A1, s2->second);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) R[i][j] += P[i][j];
        }
        sol.S_exact[nu] = sylvester_exact(A0e, k, R);
      }
    }
    for (const auto& [nu, m] : sol.S_exact) sol.S[nu] = to_matc(m);
    return sol;
  }

  std::vector<std::pair<Monomial, MatC>> Anz;
  for (const auto& [nu, mats] : sys.A)
    if (nu != zero) Anz.push_back({nu, sys.summed(nu)});
  sol.S[zero] = MatC::Identity(n, n);
  MatC I = MatC::Identity(n, n);
  MatC kron = Eigen::kroneckerProduct(A0.transpose(), I) - Eigen::kroneckerProduct(I, A0);
  for (int k = 1; k <= N; ++k) {
    MatC L = kron + double(k) * MatC::Identity(n * n, n * n);
    Eigen::PartialPivLU<MatC> lu(L);
    std::vector<Monomial> sh;
    shell(sys.mv, k, sh);
    for (const auto& nu : sh) {
      MatC R = MatC::Zero(n, n);
      bool any = false;
      for (const auto& [nu1, A1] : Anz) {
        if (!leq(nu1, nu)) continue;
        auto s2 = sol.S.find(minus(nu, nu1));
        if (s2 == sol.S.end()) continue;
        R += A1 * s2->second;
        any = true;
      }
      if (!any) continue;
      VecC x = lu.solve(Eigen::Map<VecC>(R.data(), n * n));
      sol.S[nu] = Eigen::Map<MatC>(x.data(), n, n);
    }
  }
  return sol;
}

bool recurrence_exact(const FrobeniusSystem& sys, const SeriesSolution& sol) {
  if (!sys.exact) return false;
  int n = sys.dim;
  Monomial zero(sys.mv, 0);
  auto sum = [&](const Monomial& nu) {
    RMat s = rzero(n);
    auto it = sys.A_exact.find(nu);
    if (it != sys.A_exact.end())
      for (const auto& m : it->second)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s[i][j] += m[i][j];
    return s;
  };
  RMat A0 = sum(zero);
  for (const auto& [nu, Snu] : sol.S_exact) {
    if (nu == zero) continue;
    RMat lhs = rmul(Snu, A0), t = rmul(A0, Snu);
    int k = total(nu);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lhs[i][j] += k * Snu[i][j] - t[i][j];
    for (const auto& [nu1, mats] : sys.A_exact) {
      if (nu1 == zero || !leq(nu1, nu)) continue;
      auto s2 = sol.S_exact.find(minus(nu, nu1));
      if (s2 == sol.S_exact.end()) continue;
      RMat P = rmul(sum(nu1), s2->second);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lhs[i][j] -= P[i][j];
    }
    for (auto& row : lhs)
      for (auto& x : row)
        if (x != 0) return false;
  }
  return true;
}

MatC SeriesSolution::series(const std::vector<cplx>& q) const {
  MatC s = MatC::Zero(dim, dim);
  for (const auto& [nu, m] : S) s += qpow(q, nu) * m;
  return s;
}

MatC SeriesSolution::log_part(const std::vector<cplx>& q) const {
  MatC L = MatC::Zero(dim, dim);
  for (int j = 0; j < mv; ++j) L += std::log(q[j]) * A0[j];
  return L.exp();
}

double SeriesSolution::tail_ratio(const std::vector<cplx>& q) const {
  std::vector<double> shells(order + 1, 0);
  std::vector<MatC> acc(order + 1, MatC::Zero(dim, dim));
  for (const auto& [nu, m] : S) acc[total(nu)] += qpow(q, nu) * m;
  for (int k = 0; k <= order; ++k) shells[k] = acc[k].norm();
  double last = shells[order], prev = order > 0 ? shells[order - 1] : 0;
  if (prev == 0) return last == 0 ? 0 : INFINITY;
  return last / prev;
}

double SeriesSolution::direction_residual(const FrobeniusSystem& sys) const {
  Monomial zero(mv, 0);
  double worst = 0;
  for (const auto& [nu, Snu] : S) {
    if (total(nu) == 0) continue;
    for (int j = 0; j < mv; ++j) {
      MatC r = double(nu[j]) * Snu + Snu * A0[j] - A0[j] * Snu;
      for (const auto& [nu1, mats] : sys.A) {
        if (nu1 == zero || !leq(nu1, nu)) continue;
        auto s2 = S.find(minus(nu, nu1));
        if (s2 != S.end()) r -= mats[j] * s2->second;
      }
      worst = std::max(worst, r.norm() / (1 + Snu.norm()));
    }
  }
  return worst;
}

FrobeniusSystem quantum_system(const QConnection& Q, cplx hbar, const std::vector<cplx>& h) {
  FrobeniusSystem sys;
  int n = Q.n();
  sys.dim = n;
  sys.mv = Q.m;
  for (int j = 0; j < Q.m; ++j)
    for (int w = 0; w < n; ++w)
      for (int v = 0; v < n; ++v)
        for (const auto& [mono, c] : Q.C[j][w][v].terms()) {
          cplx val = -to_double(c) / hbar;
          for (int i = 0; i < Q.r; ++i)
            if (mono[i]) val *= ipow(h[i], mono[i]);
          Monomial nu(mono.begin() + Q.r, mono.end());
          auto& mats = sys.A[nu];
          if (mats.empty()) mats.assign(Q.m, MatC::Zero(n, n));
          mats[j](w, v) += val;
        }
  sys.A.try_emplace(Monomial(Q.m, 0), std::vector<MatC>(Q.m, MatC::Zero(n, n)));
  return sys;
}

FrobeniusSystem quantum_system_exact(const QConnection& Q, const Rational& hbar,
                                     const std::vector<Rational>& h) {
  FrobeniusSystem sys;
  int n = Q.n();
  sys.dim = n;
  sys.mv = Q.m;
  sys.exact = true;
  for (int j = 0; j < Q.m; ++j)
    for (int w = 0; w < n; ++w)
      for (int v = 0; v < n; ++v)
        for (const auto& [mono, c] : Q.C[j][w][v].terms()) {
          Rational val = -c / hbar;
          for (int i = 0; i < Q.r; ++i)
            if (mono[i]) val *= ipow(h[i], mono[i]);
          Monomial nu(mono.begin() + Q.r, mono.end());
          auto& mats = sys.A_exact[nu];
          if (mats.empty()) mats.assign(Q.m, rzero(n));
          mats[j][w][v] += val;
        }
  sys.A_exact.try_emplace(Monomial(Q.m, 0), std::vector<RMat>(Q.m, rzero(n)));
  for (const auto& [nu, mats] : sys.A_exact)
    for (const auto& m : mats) sys.A[nu].push_back(to_matc(m));
  return sys;
}

SeriesSolution fundamental_solution(const QConnection& Q, cplx hbar, const std::vector<cplx>& h,
                                    const FundamentalOptions& opt) {
  double hn = 0;
  for (auto x : h) hn += std::norm(x);
  hn = std::sqrt(hn);
  if (hn > opt.radius * std::abs(hbar)) {
    std::ostringstream os;
    os << "|h|/|hbar| = " << hn / std::abs(hbar) << " exceeds the radius " << opt.radius;
    throw RadiusError(os.str());
  }
  return frobenius_solve(quantum_system(Q, hbar, h), opt.order);
}

double flatness_residual(const QConnection& Q, const SeriesSolution& sol, cplx hbar,
                         const std::vector<cplx>& h, const std::vector<cplx>& q) {
  MatC L = sol.log_part(q), Sq = sol.series(q);
  MatC full = Sq * L;
  double worst = 0;
  for (int i = 0; i < Q.m; ++i) {
    MatC d = MatC::Zero(sol.dim, sol.dim);
    for (const auto& [nu, m] : sol.S)
      if (nu[i]) d += double(nu[i]) * qpow(q, nu) * m;
    MatC deriv = d * L + Sq * sol.A0[i] * L;
    MatC C = qh::evaluate(Q.C[i], h, q);
    MatC r = deriv + C * full / hbar;
    worst = std::max(worst, r.norm() / full.norm());
  }
  return worst;
}

FrobeniusSystem anticanonical_system(const QConnection& Q, cplx hbar, const std::vector<cplx>& h) {
  FrobeniusSystem sys;
  int n = Q.n();
  sys.dim = n;
  sys.mv = 1;
  for (int w = 0; w < n; ++w)
    for (int v = 0; v < n; ++v)
      for (const auto& [mono, c] : Q.c1[w][v].terms()) {
        cplx val = -to_double(c) / hbar;
        for (int i = 0; i < Q.r; ++i)
          if (mono[i]) val *= ipow(h[i], mono[i]);
        int k = 0;
        for (int j = 0; j < Q.m; ++j) k += Q.c1_pairing[j] * mono[Q.r + j];
        auto& mats = sys.A[{k}];
        if (mats.empty()) mats.assign(1, MatC::Zero(n, n));
        mats[0](w, v) += val;
      }
  sys.A.try_emplace(Monomial{0}, std::vector<MatC>(1, MatC::Zero(n, n)));
  return sys;
}

JFunction::JFunction(const QConnection& Q, JOptions opt) : Q_(&Q), opt_(opt) {
  std::vector<cplx> h0(Q.r, 0.0);
  sys_ = anticanonical_system(Q, -1.0, h0);
  sol_ = frobenius_solve(sys_, opt_.order);
  int kmax = 0;
  for (const auto& [nu, m] : sys_.A) kmax = std::max(kmax, nu[0]);
  Ak_.assign(kmax + 1, Eigen::MatrixXd::Zero(Q.n(), Q.n()));
  for (const auto& [nu, m] : sys_.A) Ak_[nu[0]] = m[0].real();
  auto ev = Eigen::EigenSolver<Eigen::MatrixXd>(qh::c1_matrix(Q, std::vector<double>(Q.m, 1.0)))
                .eigenvalues();
  E_ = 0;
  for (int i = 0; i < ev.size(); ++i) E_ = std::max(E_, std::abs(ev[i]));
  const auto& X = Q.S->space();
  top_ = 0;
  for (int v = 0; v < Q.n(); ++v)
    if (Q.S->length(v) == X.P.ell) top_ = v;
}

std::vector<JValue> JFunction::eval(std::vector<double> s_grid) const {
  for (double s : s_grid)
    if (!(s > 0)) throw std::invalid_argument("j_function needs s > 0");
  std::vector<std::size_t> order(s_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s_grid[a] < s_grid[b]; });

  int n = Q_->n();
  const Schubert& S = *Q_->S;
  std::vector<JValue> out(s_grid.size());
  auto row = [&](const Eigen::MatrixXd& M, double ls, double s, const char* how) {
    JValue j;
    j.s = s;
    j.log_scale = ls;
    j.method = how;
    j.comps.resize(n);
    for (int v = 0; v < n; ++v) j.comps[v] = M(top_, S.vee(v));
    return j;
  };

  std::vector<double> big;
  std::vector<std::size_t> big_idx;
  for (auto i : order) {
    double s = s_grid[i];
    if (s <= opt_.switch_s) {
      out[i] = row(sol_.eval({cplx(s)}).real(), 0, s, "series");
    } else {
      big.push_back(s);
      big_idx.push_back(i);
    }
  }
  if (big.empty()) return out;

  using state = std::vector<double>;
  double s0 = opt_.switch_s, E = E_;
  Eigen::MatrixXd W0 = sol_.eval({cplx(s0)}).real();
  state x(W0.data(), W0.data() + n * n);
  auto rhs = [&](const state& w, state& dw, double s) {
    Eigen::Map<const Eigen::MatrixXd> Wm(w.data(), n, n);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    double p = 1;
    for (const auto& a : Ak_) {
      A += p * a;
      p *= s;
    }
    Eigen::MatrixXd d = (A / s - E * Eigen::MatrixXd::Identity(n, n)) * Wm;
    std::copy(d.data(), d.data() + n * n, dw.begin());
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(opt_.rtol * 1e-2, opt_.rtol,
                                      ode::runge_kutta_fehlberg78<state>());
  double cur = s0;
  double log_acc = 0;
  for (std::size_t k = 0; k < big.size(); ++k) {
    if (big[k] > cur) {
      ode::integrate_adaptive(stepper, rhs, x, cur, big[k], 1e-3);
      cur = big[k];
    }
    double mx = 0;
    for (double v : x) {
      if (!std::isfinite(v)) throw std::runtime_error("j_function: non-finite ODE state");
      mx = std::max(mx, std::abs(v));
    }
    // keep the state O(1); the factor goes to the log scale
    if (mx > 0) {
      for (double& v : x) v /= mx;
      log_acc += std::log(mx);
    }
    Eigen::Map<Eigen::MatrixXd> Wm(x.data(), n, n);
    out[big_idx[k]] = row(Wm, log_acc + E * (cur - s0), cur, "ode");
  }
  return out;
}

nlohmann::json GammaLimit::to_json() const {
  return {{"estimate", estimate}, {"error", error},       {"gamma_class", target},
          {"max_distance", max_distance}, {"status", status}, {"s_grid", s_grid}};
}

GammaLimit gamma_limit(const QConnection& Q, const std::vector<double>& s_grid,
                       const JOptions& opt) {
  if (s_grid.size() < 3) throw std::invalid_argument("gamma_limit needs at least 3 grid points");
  JFunction J(Q, opt);
  auto vals = J.eval(s_grid);
  int n = Q.n();
  GammaLimit g;
  g.s_grid = s_grid;
  for (const auto& j : vals) {
    if (j.comps[0] == 0) throw std::domain_error("<pd[pt], J> vanishes on the grid");
    std::vector<double> r(n);
    for (int v = 0; v < n; ++v) r[v] = j.comps[v] / j.comps[0];
    g.ratios.push_back(r);
  }
  auto G = gammaclass::gamma_class(*Q.S);
  g.target = G.coeffs;
  std::size_t L = vals.size();
  bool shrinking = true;
  for (int v = 0; v < n; ++v) {
    double y0 = g.ratios[L - 3][v], y1 = g.ratios[L - 2][v], y2 = g.ratios[L - 1][v];
    double den = y2 - 2 * y1 + y0, est = y2;
    double d1 = std::abs(y2 - y1), d0 = std::abs(y1 - y0);
    if (std::abs(den) > 1e-12 * (1 + std::abs(y2)) && d1 < d0) est = y2 - (y2 - y1) * (y2 - y1) / den;
    g.estimate.push_back(est);
    g.error.push_back(std::max(std::abs(est - y2), d1) + 1e-12 * (1 + std::abs(y2)));
    if (d1 > d0 + 1e-10 * (1 + std::abs(y2))) shrinking = false;
    g.max_distance = std::max(g.max_distance, std::abs(est - G.coeffs[v]));
  }
  g.status = shrinking ? "converged" : "inconclusive";
  return g;
}

cplx lambda_pairing(const Schubert& S, const std::vector<int>& lambda, const std::vector<cplx>& h) {
  const auto& d = S.space().P.divisors;
  cplx s = 0;
  for (std::size_t k = 0; k < lambda.size(); ++k) s += double(lambda[k]) * h[d[k]];
  return s;
}

cplx ia_limit_closed_form(const Schubert& S, double hbar, const std::vector<cplx>& h) {
  cplx sum = 0, lg = 0;
  for (const auto& c : S.tangent_weights(0)) {
    cplx a = schubert::coroot_value(S.space().rs, c, h) / hbar;
    sum += a;
    lg += lgamma_c(a);
  }
  return std::exp(std::log(hbar) * sum + lg);
}

cplx ia_integral(const QConnection& Q, const gammaclass::GammaClass& G, double hbar,
                 const std::vector<cplx>& h, const std::vector<cplx>& q,
                 const std::vector<cplx>& y, const IAOptions& opt) {
  if (!(hbar > 0)) throw std::invalid_argument("ia_integral needs hbar > 0");
  const Schubert& S = *Q.S;
  int n = Q.n(), ell = S.space().P.ell;
  bool zero = true;
  for (auto x : h) zero = zero && std::abs(x) == 0;
  std::vector<cplx> x;
  MatC Gm(n, n);
  if (zero) {
    std::vector<cplx> g(G.coeffs.begin(), G.coeffs.end());
    x = gammaclass::normalize0(S, g, hbar);
    const auto& P0 = S.pairing0();
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) Gm(u, v) = to_double(P0[u][v]);
  } else {
    auto rv = gammaclass::normalize_restrictions(
        S, [&](int w, const std::vector<cplx>& hh) { return G.restriction(w, hh); }, hbar, h);
    x = S.coeffs_from_restriction_values(rv, h);
    const auto& P = S.pairing();
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) Gm(u, v) = P[u][v].eval(h);
  }
  auto sol = fundamental_solution(Q, hbar, h, {opt.order, opt.radius});
  VecC xv = Eigen::Map<VecC>(x.data(), n);
  VecC yv = Eigen::Map<const VecC>(y.data(), n);
  VecC Sx = sol.eval(q) * xv;
  return std::pow(hbar, 0.5 * ell) * (Sx.transpose() * Gm * yv)(0, 0);
}

double hbar_residual(const QConnection& Q, const FlatSection& s, double hbar) {
  const Schubert& S = *Q.S;
  int n = Q.n();
  double ell = S.space().P.ell;
  double d = 2e-3 * hbar * hbar;
  auto c = s.eval(hbar);
  auto at = [&](double hb) {
    auto r = s.eval(hb);
    return VecC(r.v * std::exp(r.log_scale - c.log_scale));
  };
  VecC deriv = (-at(hbar + 2 * d) + 8.0 * at(hbar + d) - 8.0 * at(hbar - d) + at(hbar - 2 * d)) /
               (12 * d);
  MatC C1 = qh::c1_matrix(Q, std::vector<double>(Q.m, 1.0)).cast<cplx>();
  VecC mu_s(n);
  for (int v = 0; v < n; ++v) mu_s[v] = (S.length(v) - ell / 2) * c.v[v];
  VecC c1s = C1 * c.v / (hbar * hbar);
  VecC res = deriv - c1s + mu_s / hbar;
  double scale = c1s.norm() + c.v.norm() / hbar;
  return scale == 0 ? res.norm() : res.norm() / scale;
}

nlohmann::json AsymptoticReport::to_json() const {
  return {{"passes", passes}, {"slope", slope}, {"intercept", intercept},
          {"rms", rms},       {"max_section_residual", max_section_residual},
          {"grid", grid},     {"log_norms", log_norms}, {"notice", notice}};
}

AsymptoticReport asymptotic_class_test(const QConnection& Q, const FlatSection& s, double E,
                                       const std::vector<double>& hbar_grid,
                                       const AsymptoticOptions& opt) {
  AsymptoticReport rep;
  std::vector<double> xs;
  int trimmed = 0;
  for (double hb : hbar_grid) {
    auto r = s.eval(hb);
    double nrm = r.v.norm();
    if (!(nrm > 0) || !std::isfinite(nrm) || !std::isfinite(r.log_scale)) {
      ++trimmed;
      continue;
    }
    rep.grid.push_back(hb);
    xs.push_back(std::log(hb));
    rep.log_norms.push_back(std::log(nrm) + r.log_scale + E / hb);
  }
  if (trimmed) rep.notice = "trimmed " + std::to_string(trimmed) + " grid points (underflow)";
  if (rep.grid.size() < 3) {
    rep.notice += rep.notice.empty() ? "" : "; ";
    rep.notice += "fewer than 3 usable grid points";
    return rep;
  }
  auto fit = fit_line(xs, rep.log_norms);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  rep.rms = fit.rms;
  int ns = std::min<int>(opt.residual_samples, (int)rep.grid.size());
  for (int k = 0; k < ns; ++k) {
    std::size_t i = ns == 1 ? 0 : k * (rep.grid.size() - 1) / (ns - 1);
    rep.max_section_residual = std::max(rep.max_section_residual, hbar_residual(Q, s, rep.grid[i]));
  }
  rep.passes = rep.rms < opt.rms_tol && std::abs(rep.slope) < opt.slope_bound &&
               rep.max_section_residual < opt.residual_tol;
  return rep;
}

MirInverse mir_inverse_on_c1_span(const QConnection& Q, int k_max) {
  const Schubert& S = *Q.S;
  int n = Q.n(), ell = S.space().P.ell, nv = Q.r + Q.m + 1, hb = nv - 1;
  if (k_max < 0) k_max = ell;
  MirInverse out;
  out.nvars = nv;
  PolyMatrix c1(n, std::vector<Poly>(n));
  for (int w = 0; w < n; ++w)
    for (int v = 0; v < n; ++v) c1[w][v] = Q.c1[w][v].resize(nv);
  Poly hbar = Poly::variable(nv, hb);

  std::vector<Poly> cur(n, Poly(nv));
  cur[0] = Poly::constant(nv, 1);
  out.A.push_back(cur);
  for (int k = 0; k < k_max; ++k) {
    std::vector<Poly> nxt(n, Poly(nv));
    for (int w = 0; w < n; ++w) {
      Poly V(nv);
      for (int j = 0; j < Q.m; ++j) V += cur[w].euler(Q.r + j) * Rational(Q.c1_pairing[j]);
      nxt[w] = hbar * V - hbar * cur[w] * Rational(k);
      for (int v = 0; v < n; ++v)
        if (!c1[w][v].is_zero() && !cur[v].is_zero()) nxt[w] += c1[w][v] * cur[v];
    }
    cur = nxt;
    out.A.push_back(cur);
  }

  // one Schubert class per length is needed for the triangular solve
  std::vector<int> of_length(ell + 1, -1);
  bool single = n == ell + 1 && k_max >= ell;
  for (int v = 0; v < n && single; ++v) {
    int l = S.length(v);
    if (of_length[l] >= 0) single = false;
    of_length[l] = v;
  }
  for (int j = 0; j <= ell && single; ++j)
    if (!out.A[j][of_length[j]].is_constant() || out.A[j][of_length[j]].is_zero()) single = false;
  if (!single) {
    out.status = "partial: cohomology is not generated by c1 in this basis";
    return out;
  }
  for (int v = 0; v < n; ++v) {
    std::vector<Poly> T(n);
    for (int w = 0; w < n; ++w) T[w] = S.dual_coeffs(v)[w].resize(nv);
    std::vector<Poly> c(ell + 1, Poly(nv));
    for (int j = ell; j >= 0; --j) {
      int w = of_length[j];
      Poly rem = T[w];
      for (int k = j + 1; k <= ell; ++k) rem -= c[k] * out.A[k][w];
      c[j] = rem * (1 / out.A[j][w].constant_term());
    }
    for (int w = 0; w < n; ++w) {
      Poly chk = T[w];
      for (int k = 0; k <= ell; ++k) chk -= c[k] * out.A[k][w];
      if (!chk.is_zero()) {
        out.status = "partial: reconstruction failed";
        out.c.clear();
        return out;
      }
    }
    out.c.push_back(c);
  }
  out.complete = true;
  out.status = "complete";
  return out;
}

}  // namespace gammaflag::flat
