#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "gammaflag/flatsections.hpp"

using namespace gammaflag;
using namespace gammaflag::flat;

namespace {

// sum_d s^{(n+1) d} / (d!)^{n+1}, the component of J on 1 for P^n
double hypergeometric(int n, double s) {
  double acc = 0;
  for (int d = 0; d < 200; ++d) {
    double t = std::exp((n + 1) * (d * std::log(s) - std::lgamma(d + 1.0)));
    acc += t;
    if (d > 5 && t < 1e-18 * acc) break;
  }
  return acc;
}

// int_0^oo e^{-(a + 1/a)} da / a by quadrature in u = log a
double bessel_oracle() {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [](double u) { return std::exp(-2 * std::cosh(u)); };
  return 2 * ts.integrate(f, 0.0, 30.0);
}

struct Setup {
  lie::FlagSpace X;
  schubert::Schubert S;
  qh::QConnection Q;
  explicit Setup(const std::string& label)
      : X(lie::make_space(label)), S(X), Q(qh::build_connection(S)) {}
};

}  // namespace

TEST_CASE("Frobenius: trivial and scalar systems") {
  FrobeniusSystem sys;
  sys.dim = 2;
  sys.mv = 1;
  MatC A0(2, 2);
  A0 << 0, 0, 1, 0;
  sys.A[{0}] = {A0};
  auto sol = frobenius_solve(sys, 5);
  CHECK(sol.S.size() == 1);
  CHECK((sol.S.at({0}) - MatC::Identity(2, 2)).norm() == 0);
  MatC L = sol.eval({cplx(2.0)});
  CHECK(std::abs(L(1, 0) - std::log(2.0)) < 1e-14);

  // s v' = (lambda + s) v has v = s^lambda e^s
  FrobeniusSystem sc;
  sc.dim = 1;
  sc.mv = 1;
  sc.exact = true;
  Rational lam(1, 3);
  sc.A_exact[{0}] = {RMat{{lam}}};
  sc.A_exact[{1}] = {RMat{{Rational(1)}}};
  for (auto& [nu, m] : sc.A_exact) sc.A[nu] = {MatC::Constant(1, 1, to_double(m[0][0][0]))};
  auto s2 = frobenius_solve(sc, 12);
  CHECK(recurrence_exact(sc, s2));
  Rational f = 1;
  for (int k = 0; k <= 12; ++k) {
    if (k) f /= k;
    CHECK(s2.S_exact.at({k})[0][0] == f);
  }
  double s = 0.7;
  CHECK(std::abs(s2.eval({cplx(s)})(0, 0) - std::pow(s, 1.0 / 3) * std::exp(s)) < 1e-10);
}

TEST_CASE("Frobenius: resonance is reported") {
  FrobeniusSystem sys;
  sys.dim = 2;
  sys.mv = 1;
  MatC A0 = MatC::Zero(2, 2);
  A0(0, 0) = 2.0;
  sys.A[{0}] = {A0};
  sys.A[{1}] = {MatC::Ones(2, 2)};
  CHECK_THROWS_AS(frobenius_solve(sys, 3), ResonanceError);
  CHECK_NOTHROW(frobenius_solve(sys, 1));
  try {
    frobenius_solve(sys, 3);
  } catch (const ResonanceError& e) {
    CHECK(e.shift == 2);
  }
}

TEST_CASE("P1 fundamental solution: hypergeometric coefficients") {
  Setup P("P1");
  auto sys = quantum_system_exact(P.Q, Rational(-1), {Rational(0)});
  auto sol = frobenius_solve(sys, 15);
  CHECK(recurrence_exact(sys, sol));
  int top = 1;
  for (int d = 0; d <= 15; ++d) {
    Rational inv = 1;
    for (int k = 2; k <= d; ++k) inv *= k * k;
    CHECK(sol.S_exact.at({d})[top][top] == 1 / inv);
  }
  // order 0 is the log part exp(-H/hbar) with H = log q c1(L), c1(L) = sigma
  MatC L = sol.log_part({cplx(3.0)});
  CHECK(std::abs(L(1, 0) - std::log(3.0)) < 1e-13);
}

TEST_CASE("fundamental solution: exact recurrence and flatness") {
  for (auto label : {"P2", "Gr24", "Fl3"}) {
    Setup P(label);
    std::vector<Rational> h(P.Q.r, 0);
    auto sys = quantum_system_exact(P.Q, Rational(3, 2), h);
    auto sol = frobenius_solve(sys, std::string(label) == "Fl3" ? 5 : 8);
    CHECK(recurrence_exact(sys, sol));
    CHECK(sol.direction_residual(sys) < 1e-12);
  }
  Setup G("Gr24");
  for (auto [hb, q] : {std::pair{0.8, 0.3}, std::pair{1.7, 0.9}, std::pair{-1.0, 0.5}}) {
    auto sol = fundamental_solution(G.Q, hb, {0.0, 0.0, 0.0}, {60, 0.5});
    CHECK(flatness_residual(G.Q, sol, hb, {0.0, 0.0, 0.0}, {cplx(q)}) < 1e-12);
  }
  std::vector<cplx> h = {0.05, -0.03, 0.02};
  auto sol = fundamental_solution(G.Q, 1.0, h, {60, 0.5});
  CHECK(flatness_residual(G.Q, sol, 1.0, h, {cplx(0.6)}) < 1e-12);
  Setup F("Fl3");
  std::vector<cplx> hf = {0.04, -0.07};
  auto solf = fundamental_solution(F.Q, 1.3, hf, {25, 0.5});
  CHECK(solf.direction_residual(quantum_system(F.Q, 1.3, hf)) < 1e-12);
  CHECK(flatness_residual(F.Q, solf, 1.3, hf, {cplx(0.4), cplx(0.3)}) < 1e-12);
  CHECK_THROWS_AS(fundamental_solution(F.Q, 0.1, {0.5, 0.5}), RadiusError);
}

TEST_CASE("J-function along the anticanonical line") {
  for (int n : {1, 2}) {
    Setup P("P" + std::to_string(n));
    JFunction J(P.Q);
    auto small = J.eval(1e-6);
    CHECK(std::abs(small.comps[0] - 1) < 1e-10);
    for (double s : {0.5, 1.0, 2.5, 7.0, 15.0}) {
      auto j = J.eval(s);
      double ref = hypergeometric(n, s);
      CAPTURE(s);
      CHECK(std::abs(std::log(j.comps[0]) + j.log_scale - std::log(ref)) < 1e-9);
    }
  }
}

TEST_CASE("Gamma conjecture I limit for P1 and P2") {
  std::vector<double> grid = {10, 20, 30, 40, 50, 60};
  Setup P1("P1");
  auto g1 = gamma_limit(P1.Q, grid);
  double gam = gammaclass::euler_gamma();
  CHECK(std::abs(g1.estimate[0] - 1) < 1e-12);
  CHECK(std::abs(g1.estimate[1] + 2 * gam) < 1e-6);
  CHECK(g1.status == "converged");
  Setup P2("P2");
  auto g2 = gamma_limit(P2.Q, grid);
  CHECK(std::abs(g2.estimate[1] + 3 * gam) < 1e-6);
  CHECK(g2.max_distance < 1e-6);
  // small s is far from the limit
  CHECK(std::abs(gamma_limit(P1.Q, {0.1, 0.2, 0.3}).estimate[1] + 2 * gam) > 0.1);
}

TEST_CASE("I^A: spot value, W-invariance, closed-form limit") {
  Setup P("P1");
  auto G = gammaclass::gamma_class(P.S);
  std::vector<cplx> one = {1.0, 0.0};
  cplx v = ia_integral(P.Q, G, 1.0, {0.0}, {1.0}, one);
  CHECK(std::abs(v - bessel_oracle()) < 1e-10);
  CHECK(std::abs(v.real() - 0.2277877) < 1e-7);

  // h = 0 agrees with the equivariant route as h -> 0
  cplx va = ia_integral(P.Q, G, 1.0, {1e-4}, {1.0}, one);
  CHECK(std::abs(va - v) < 1e-6);

  // W-invariance
  for (auto label : {"P1", "Fl3", "P2"}) {
    Setup Y(label);
    auto GY = gammaclass::gamma_class(Y.S);
    std::vector<cplx> h = {0.11, -0.07};
    h.resize(Y.Q.r);
    std::vector<cplx> y(Y.S.n(), 0.0);
    y[0] = 1;
    std::vector<cplx> q(Y.Q.m, 0.7);
    cplx base = ia_integral(Y.Q, GY, 0.9, h, q, y, {40, 0.5});
    for (int w = 1; w < (int)Y.X.W.size(); ++w) {
      auto hw = schubert::act_on_h(Y.X.W, w, h);
      CAPTURE(label);
      CHECK(std::abs(ia_integral(Y.Q, GY, 0.9, hw, q, y, {40, 0.5}) - base) < 1e-8);
    }
  }

  // s -> 0 limit with alpha(h)/hbar = -1.3
  double hb = 0.8;
  std::vector<cplx> h = {-0.65 * hb};
  auto scaled = [&](double s) {
    return ia_integral(P.Q, G, hb, h, {s}, one, {20, 1.0}) *
           std::exp(-std::log(s) * lambda_pairing(P.S, {1}, h) / hb);
  };
  cplx a = scaled(2e-4), b = scaled(1e-4);
  cplx ext = 2.0 * b - a, ref = ia_limit_closed_form(P.S, hb, h);
  CHECK(std::abs(ext - ref) < 1e-4 * std::abs(ref));
}

TEST_CASE("Mir inverse on the c1 span") {
  Setup P("P1");
  auto M = mir_inverse_on_c1_span(P.Q);
  REQUIRE(M.complete);
  int nv = M.nvars;  // x, q, hbar
  CHECK(M.A[0][0] == Poly::constant(nv, 1));
  // sigma^e = A_1/2 - (alpha(h)/2) A_0, alpha(h) = 2x
  CHECK(M.c[0][1] == Poly::constant(nv, Rational(1, 2)));
  CHECK(M.c[0][0] == -Poly::variable(nv, 0));
  CHECK(M.c[1][0] == Poly::constant(nv, 1));

  Setup P2("P2");
  auto M2 = mir_inverse_on_c1_span(P2.Q);
  REQUIRE(M2.complete);
  // A_2 = c1*c1 - hbar c1 at h = 0
  auto c1q = P2.Q.c1;
  int n = 3, v2 = M2.nvars;
  for (int w = 0; w < n; ++w) {
    Poly expect(v2);
    for (int u = 0; u < n; ++u) expect += c1q[w][u].resize(v2) * c1q[u][0].resize(v2);
    expect -= Poly::variable(v2, v2 - 1) * c1q[w][0].resize(v2);
    for (int i = 0; i < 2; ++i) expect = expect.specialize(i, 0);
    Poly got = M2.A[2][w];
    for (int i = 0; i < 2; ++i) got = got.specialize(i, 0);
    CHECK(got == expect);
  }
  Setup F("Fl3");
  CHECK_FALSE(mir_inverse_on_c1_span(F.Q).complete);
}

TEST_CASE("asymptotic class test on a closed-form P1 section") {
  Setup P("P1");
  // hbar^{-1/2} (F1/2 sigma_e + F0 sigma_1), F0 = 2K_0(2/hbar), F1 = 4K_1(2/hbar);
  // scaled Bessel functions keep the values finite
  auto gamma_sec = [](double hb) {
    double z = 2 / hb;
    double k0 = boost::math::cyl_bessel_k(0, z) * std::exp(z);
    double k1 = boost::math::cyl_bessel_k(1, z) * std::exp(z);
    ScaledVec r;
    r.v = VecC(2);
    r.v << 2 * k1 / std::sqrt(hb), 2 * k0 / std::sqrt(hb);
    r.log_scale = -z;
    return r;
  };
  auto other = [](double hb) {
    double z = 2 / hb;
    double i0 = boost::math::cyl_bessel_i(0, z) * std::exp(-z);
    double i1 = boost::math::cyl_bessel_i(1, z) * std::exp(-z);
    ScaledVec r;
    r.v = VecC(2);
    r.v << -2 * std::numbers::pi * i1 / std::sqrt(hb), 2 * std::numbers::pi * i0 / std::sqrt(hb);
    r.log_scale = z;
    return r;
  };
  FlatSection s{gamma_sec, "closed form"};
  FlatSection o{other, "closed form"};
  CHECK(hbar_residual(P.Q, s, 0.1) < 1e-8);
  CHECK(hbar_residual(P.Q, o, 0.1) < 1e-8);
  std::vector<double> grid;
  for (int k = 0; k <= 12; ++k) grid.push_back(0.02 + k * 0.015);
  auto good = asymptotic_class_test(P.Q, s, 2.0, grid);
  CHECK(good.passes);
  CHECK(std::abs(good.slope) < 1);
  CHECK_FALSE(asymptotic_class_test(P.Q, s, 2.5, grid).passes);
  FlatSection pert{[&](double hb) {
                     auto a = gamma_sec(hb), b = other(hb);
                     ScaledVec r;
                     r.log_scale = b.log_scale;
                     r.v = a.v * std::exp(a.log_scale - b.log_scale) + 1e-6 * b.v;
                     return r;
                   },
                   "perturbed"};
  CHECK(hbar_residual(P.Q, pert, 0.1) < 1e-8);
  CHECK_FALSE(asymptotic_class_test(P.Q, pert, 2.0, grid).passes);
}
