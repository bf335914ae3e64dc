#include "gammaflag/gammaclass.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace gammaflag::gammaclass {

double euler_gamma() {
  static const double g = [] {
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    auto f = [](double t) { return t > 700 ? 0.0 : std::exp(-t) * std::log(t); };
    return -(ts.integrate(f, 0.0, 1.0) + es.integrate(f, 1.0, INFINITY));
  }();
  return g;
}

double zeta(int k) {
  if (k < 2) throw std::invalid_argument("zeta(k) needs k >= 2");
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  boost::math::quadrature::exp_sinh<double> es;
  double lf = std::lgamma(double(k));
  auto f = [k, lf](double t) {
    if (t <= 0 || t > 1e4) return 0.0;
    return std::exp((k - 1) * std::log(t) - lf - t) / -std::expm1(-t);
  };
  double v = es.integrate(f, 0.0, INFINITY);
  cache[k] = v;
  return v;
}

double gamma_quadrature(double x) {
  if (!(x > 0)) throw std::invalid_argument("gamma_quadrature needs x > 0");
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  auto f = [x](double t) {
    return t <= 0 || t > 1e4 ? 0.0 : std::exp(-t + (x - 1) * std::log(t));
  };
  return ts.integrate(f, 0.0, 1.0) + es.integrate(f, 1.0, INFINITY);
}

LogGammaSeries log_gamma_coeffs(int K) {
  if (K < 1) throw std::invalid_argument("log_gamma_coeffs needs K >= 1");
  LogGammaSeries s;
  s.K = K;
  s.b.assign(K + 1, 0.0);
  s.b[1] = -euler_gamma();
  for (int k = 2; k <= K; ++k) s.b[k] = ((k % 2) ? -1.0 : 1.0) * zeta(k) / k;
  return s;
}

cplx LogGammaSeries::eval(cplx x) const {
  cplx acc = 0, p = 1;
  for (int k = 1; k <= K; ++k) {
    p *= x;
    acc += b[k] * p;
  }
  return acc;
}

double LogGammaSeries::truncation_error(double x) const {
  return std::abs(eval(x).real() - std::lgamma(1 + x));
}

std::vector<Rational> power_sum_class(const Schubert& S, int k) {
  int nn = S.n(), r = S.nvars();
  std::vector<Rational> out(nn, 0);
  if (k > S.space().P.ell) return out;
  std::vector<EquivPoly> restr(nn, Poly(r));
  for (int w = 0; w < nn; ++w)
    for (const auto& c : S.tangent_weights(w))
      restr[w] += schubert::coroot_form(S.space().rs, c).pow(k);
  auto c = S.class_from_restrictions(restr);
  for (int v = 0; v < nn; ++v)
    if (S.length(v) == k) out[v] = c[v].constant_term();
  return out;
}

std::vector<Rational> c1_class(const Schubert& S) {
  const auto& X = S.space();
  std::vector<Rational> c(S.n(), 0);
  for (int k = 0; k < X.ndiv(); ++k)
    c[X.P.position(X.W.from_word({X.P.divisors[k]}))] = X.P.c1_pairing[k];
  return c;
}

cplx GammaClass::restriction(int w, const std::vector<cplx>& h) const {
  cplx acc = 0;
  for (const auto& c : S->tangent_weights(w))
    acc += lgamma_c(1.0 + schubert::coroot_value(S->space().rs, c, h));
  return std::exp(acc);
}

GammaClass gamma_class(const Schubert& S, int K) {
  int ell = S.space().P.ell, nn = S.n();
  if (K < ell)
    throw std::invalid_argument("truncation order K = " + std::to_string(K) +
                                " is below dim = " + std::to_string(ell));
  auto lg = log_gamma_coeffs(std::max(K, 1));
  std::vector<double> L(nn, 0.0);
  for (int k = 1; k <= ell; ++k) {
    auto p = power_sum_class(S, k);
    for (int v = 0; v < nn; ++v) L[v] += lg.b[k] * to_double(p[v]);
  }
  // exp in the nilpotent ring
  std::vector<double> out(nn, 0.0), term(nn, 0.0);
  out[0] = term[0] = 1.0;
  for (int j = 1; j <= ell; ++j) {
    term = S.mul0(term, L);
    for (auto& t : term) t /= j;
    for (int v = 0; v < nn; ++v) out[v] += term[v];
  }
  GammaClass g;
  g.S = &S;
  g.coeffs = std::move(out);
  return g;
}

std::vector<cplx> normalize0(const Schubert& S, const std::vector<cplx>& x, double hbar) {
  int ell = S.space().P.ell, nn = S.n();
  auto c1r = c1_class(S);
  std::vector<cplx> c1(nn);
  for (int v = 0; v < nn; ++v) c1[v] = to_double(c1r[v]);
  double L = std::log(hbar);
  std::vector<cplx> y = x, term = x;
  for (int j = 1; j <= ell; ++j) {
    term = S.mul0(c1, term);
    for (auto& t : term) t *= L / j;
    for (int v = 0; v < nn; ++v) y[v] += term[v];
  }
  for (int v = 0; v < nn; ++v) y[v] *= std::pow(hbar, 0.5 * ell - S.length(v));
  return y;
}

cplx c1_restriction(const Schubert& S, int w, const std::vector<cplx>& h) {
  cplx s = 0;
  for (const auto& c : S.tangent_weights(w)) s += schubert::coroot_value(S.space().rs, c, h);
  return s;
}

std::vector<cplx> normalize_restrictions(const Schubert& S, const RestrictionFn& x, double hbar,
                                         const std::vector<cplx>& h) {
  int ell = S.space().P.ell;
  std::vector<cplx> hs(h.size());
  for (std::size_t j = 0; j < h.size(); ++j) hs[j] = h[j] / hbar;
  std::vector<cplx> out(S.n());
  double L = std::log(hbar);
  for (int w = 0; w < S.n(); ++w)
    out[w] = std::pow(hbar, 0.5 * ell) * std::exp(L * c1_restriction(S, w, hs)) * x(w, hs);
  return out;
}

std::vector<cplx> normalize_class(const Schubert& S, const std::vector<EquivPoly>& coeffs,
                                  double hbar, const std::vector<cplx>& h) {
  auto restr = S.restrictions_from_class(coeffs);
  auto vals = normalize_restrictions(
      S, [&](int w, const std::vector<cplx>& hh) { return restr[w].eval(hh); }, hbar, h);
  return S.coeffs_from_restriction_values(vals, h);
}

}  // namespace gammaflag::gammaclass
