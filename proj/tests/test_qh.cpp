#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gammaflag/qh.hpp"

using namespace gammaflag;
using namespace gammaflag::qh;

namespace {

using RMat = std::vector<std::vector<Rational>>;

RMat rmul(const RMat& a, const RMat& b) {
  int n = (int)a.size();
  RMat c(n, std::vector<Rational>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

RMat radd(RMat a, const RMat& b, Rational s = 1) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) a[i][j] += s * b[i][j];
  return a;
}

RMat rid(int n, Rational s = 1) {
  RMat c(n, std::vector<Rational>(n, 0));
  for (int i = 0; i < n; ++i) c[i][i] = s;
  return c;
}

bool is_zero(const RMat& a) {
  for (auto& row : a)
    for (auto& x : row)
      if (x != 0) return false;
  return true;
}

// Characteristic polynomial by Faddeev-LeVerrier (exact).
std::vector<Rational> charpoly(const RMat& A) {
  int n = (int)A.size();
  std::vector<Rational> c(n + 1, 0);
  c[n] = 1;
  RMat M = rid(n, 0);
  for (int k = 1; k <= n; ++k) {
    M = radd(rmul(A, M), rid(n, c[n - k + 1]));
    RMat AM = rmul(A, M);
    Rational tr = 0;
    for (int i = 0; i < n; ++i) tr += AM[i][i];
    c[n - k] = -tr / k;
  }
  return c;
}

// Independent oracle: sigma_1 * on QH(Gr(2,4)) by quantum Pieri, basis of
// partitions in a 2x2 box.
RMat pieri_gr24(Rational q) {
  std::vector<std::pair<int, int>> parts = {{0, 0}, {1, 0}, {2, 0}, {1, 1}, {2, 1}, {2, 2}};
  auto idx = [&](int a, int b) {
    for (int k = 0; k < 6; ++k)
      if (parts[k] == std::make_pair(a, b)) return k;
    return -1;
  };
  RMat M(6, std::vector<Rational>(6, 0));
  for (int k = 0; k < 6; ++k) {
    auto [a, b] = parts[k];
    if (a + 1 <= 2) M[idx(a + 1, b)][k] += 1;
    if (b + 1 <= a) M[idx(a, b + 1)][k] += 1;
    if (a == 2 && b >= 1) M[idx(b - 1, 0)][k] += q;  // drop first row, shift
  }
  return M;
}

RMat at(const PolyMatrix& M, int r, std::vector<Rational> q) {
  return evaluate_exact(M, std::vector<Rational>(r, 0), q);
}

}  // namespace

TEST_CASE("P1: sigma * sigma = q, equivariantly alpha sigma + q") {
  auto X = lie::make_space("P1");
  Schubert S(X);
  auto Q = build_connection(S);
  auto col = quantum_chevalley(S, 0, 1);
  // c1(L) = sigma - omega(h): sigma * sigma = c1(L)*sigma + x sigma
  Poly x = Poly::variable(2, 0), q = Poly::variable(2, 1);
  Poly alpha = schubert::coroot_form(X.rs, {1}, 2);
  CHECK(col[0] == q);
  CHECK(col[1] + x == alpha);
  auto M = at(Q.c1, 1, {1});
  CHECK(M == RMat{{0, 2}, {2, 0}});
}

TEST_CASE("P^n relations") {
  for (int n = 1; n <= 4; ++n) {
    auto X = lie::make_space("P" + std::to_string(n));
    Schubert S(X);
    auto Q = build_connection(S);
    RMat C = at(Q.C[0], n, {Rational(3, 2)});
    RMat P = rid(n + 1);
    for (int k = 0; k <= n; ++k) P = rmul(C, P);
    CHECK(P == rid(n + 1, Rational(3, 2)));
  }
  auto X = lie::make_space("P2");
  Schubert S(X);
  auto Q = build_connection(S);
  auto rep = conjecture_O_certify(Q, {1.0});
  CHECK(std::abs(rep.E_O - 3) < 1e-12);
  CHECK(rep.multiplicity == 1);
  CHECK(rep.max_modulus_set.size() == 3);
  CHECK(rep.status == "certified");
}

TEST_CASE("odd quadric B3/P1: h^6 = 4 q h") {
  auto X = lie::make_space('B', 3, {2, 3});
  Schubert S(X);
  auto Q = build_connection(S);
  RMat C = at(Q.C[0], 3, {Rational(1)});
  RMat P6 = rid(X.n());
  for (int k = 0; k < 6; ++k) P6 = rmul(C, P6);
  CHECK(P6 == radd(rid(X.n(), 0), C, 4));
}

TEST_CASE("C3/P1 is P^5") {
  auto X = lie::make_space('C', 3, {2, 3});
  Schubert S(X);
  auto Q = build_connection(S);
  RMat C = at(Q.C[0], 3, {Rational(2)});
  RMat P = rid(6);
  for (int k = 0; k < 6; ++k) P = rmul(C, P);
  CHECK(P == rid(6, 2));
}

TEST_CASE("Gr(2,4) against quantum Pieri") {
  auto X = lie::make_space("Gr24");
  Schubert S(X);
  auto Q = build_connection(S);
  for (Rational q : {Rational(1), Rational(2), Rational(-3, 5)})
    CHECK(charpoly(at(Q.C[0], 3, {q})) == charpoly(pieri_gr24(q)));
  // classical part equals equivariant cup with the divisor
  for (int v = 0; v < X.n(); ++v) {
    auto cup = S.cup(S.schubert_class(1), S.schubert_class(v));
    for (int w = 0; w < X.n(); ++w) {
      Poly expect = cup.coeffs[w].resize(4);
      if (w == v) expect -= Poly::variable(4, 1);  // omega_2(h) = x_2
      CHECK(Q.C[0][w][v].specialize(3, 0) == expect);
    }
  }
}

TEST_CASE("Fl3: Givental-Kim relations") {
  auto X = lie::make_space("Fl3");
  Schubert S(X);
  auto Q = build_connection(S);
  Rational q1(2), q2(Rational(3, 7));
  RMat C1 = at(Q.C[0], 2, {q1, q2}), C2 = at(Q.C[1], 2, {q1, q2});
  RMat X1 = C1, X2 = radd(C2, C1, -1), X3 = radd(rid(6, 0), C2, -1);
  RMat E2 = radd(radd(rmul(X1, X2), rmul(X1, X3)), rmul(X2, X3));
  CHECK(is_zero(radd(E2, rid(6, q1 + q2))));
  RMat E3 = rmul(rmul(X1, X2), X3);
  CHECK(is_zero(radd(radd(E3, X3, q1), X1, q2)));
}

TEST_CASE("flatness, grading, and nonnegativity") {
  for (auto spec : {"Gr24", "Fl3", "Fl4", "P3"}) {
    auto X = lie::make_space(spec);
    Schubert S(X);
    auto Q = build_connection(S);
    CHECK(flatness_defect(Q) == "");
    CHECK(grading_defect(Q) == "");
    CHECK(indecomposable(Q));
    std::vector<double> q(Q.m);
    for (int k = 0; k < Q.m; ++k) q[k] = 0.5 + k;
    CHECK(c1_matrix(Q, q).minCoeff() >= 0);
  }
  auto X = lie::make_space('B', 2, {});
  Schubert S(X);
  auto Q = build_connection(S);
  CHECK(flatness_defect(Q) == "");
  auto Y = lie::make_space('G', 2, {});
  Schubert SG(Y);
  auto QG = build_connection(SG);
  CHECK(flatness_defect(QG) == "");
}

TEST_CASE("spectra and positive points") {
  struct Case {
    const char* spec;
    double expect;
  };
  for (auto c : {Case{"P1", 2.0}, Case{"P2", 3.0}, Case{"Gr24", -1}, Case{"Fl3", -1}}) {
    auto X = lie::make_space(c.spec);
    Schubert S(X);
    auto Q = build_connection(S);
    std::vector<double> q(Q.m, 1.0);
    auto rep = conjecture_O_certify(Q, q);
    CHECK(rep.status == "certified");
    CHECK(rep.multiplicity == 1);
    if (c.expect > 0) CHECK(std::abs(rep.E_O - c.expect) < 1e-9);
    auto pp = schubert_positive_point(Q, q);
    for (double l : pp.lambda) CHECK(l > 0);
    CHECK(std::abs(pp.lambda_c1 - rep.E_O) < 1e-9);
    CHECK(pp.hom_residual < 1e-9);
  }
  // P1: lambda(sigma_{s1}) = sqrt(q)
  auto X = lie::make_space("P1");
  Schubert S(X);
  auto Q = build_connection(S);
  auto pp = schubert_positive_point(Q, {4.0});
  CHECK(std::abs(pp.lambda[0] - 1) < 1e-12);
  CHECK(std::abs(pp.lambda[1] - 2) < 1e-12);
  // Gr(2,4) at q = 1: the eigenvalues of sigma_1 are the sums of two distinct
  // 4th roots of -1, and c1 = 4 sigma_1.
  auto G = lie::make_space("Gr24");
  Schubert SG(G);
  auto QG = build_connection(SG);
  auto rep = conjecture_O_certify(QG, {1.0});
  double best = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      cplx za = std::polar(1.0, std::numbers::pi * (2 * a + 1) / 4);
      cplx zb = std::polar(1.0, std::numbers::pi * (2 * b + 1) / 4);
      best = std::max(best, std::abs(za + zb));
    }
  CHECK(std::abs(rep.E_O - 4 * best) < 1e-9);
}
