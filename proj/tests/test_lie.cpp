#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "gammaflag/lie.hpp"

using namespace gammaflag::lie;

namespace {

// Independent oracle: |W| from the classical order formulas.
long long weyl_order(char t, int r) {
  auto fact = [](int k) {
    long long f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  switch (t) {
    case 'A': return fact(r + 1);
    case 'B':
    case 'C': return (1LL << r) * fact(r);
    case 'D': return (1LL << (r - 1)) * fact(r);
    case 'E': return r == 6 ? 51840 : 2903040;
    case 'F': return 1152;
    case 'G': return 12;
  }
  return 0;
}

int coxeter_m(int aij, int aji) {
  switch (aij * aji) {
    case 0: return 2;
    case 1: return 3;
    case 2: return 4;
    case 3: return 6;
  }
  return -1;
}

std::vector<IntVec> sorted(std::vector<IntVec> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("small root systems") {
  auto a1 = build_root_system(cartan_datum('A', 1));
  CHECK(a1.positive_roots.size() == 1);
  CHECK(a1.simple_pairing(0, 0) == 2);

  auto a2 = build_root_system(cartan_datum('A', 2));
  CHECK(sorted(a2.positive_roots) == sorted({{1, 0}, {0, 1}, {1, 1}}));

  auto g2 = build_root_system(cartan_datum('G', 2));
  CHECK(g2.positive_roots.size() == 6);
  for (const auto& r : g2.positive_roots)
    for (int x : r) CHECK(x >= 0);
}

TEST_CASE("root counts and Weyl orders across types") {
  std::vector<std::pair<char, int>> types = {{'A', 1}, {'A', 3}, {'B', 2}, {'B', 3}, {'C', 3},
                                             {'D', 4}, {'G', 2}, {'F', 4}, {'A', 4}};
  for (auto [t, r] : types) {
    CAPTURE(t);
    CAPTURE(r);
    auto rs = build_root_system(cartan_datum(t, r));
    auto W = weyl_elements(rs);
    CHECK((long long)W.size() == weyl_order(t, r));
    int w0 = W.longest();
    CHECK((std::size_t)W.length[w0] == rs.positive_roots.size());
    CHECK(W.multiply(w0, w0) == 0);
    // (s_i s_j)^m = e
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        if (i == j) continue;
        int m = coxeter_m(rs.datum.cartan(i, j), rs.datum.cartan(j, i));
        IntVec word;
        for (int k = 0; k < m; ++k) {
          word.push_back(i);
          word.push_back(j);
        }
        CHECK(W.from_word(word) == 0);
      }
    // length = number of inversions
    for (std::size_t w = 0; w < W.size(); w += 7)
      CHECK((std::size_t)W.length[w] == inversion_coroots(rs, W, (int)w).size());
  }
}

TEST_CASE("E6 root count") {
  auto rs = build_root_system(cartan_datum('E', 6));
  CHECK(rs.positive_roots.size() == 36);
}

TEST_CASE("validation rejects bad matrices") {
  CartanDatum d = cartan_datum('A', 2);
  d.cartan(0, 1) = 1;
  CHECK_THROWS_AS(validate(d), std::invalid_argument);
  d = cartan_datum('A', 2);
  d.cartan(0, 1) = -2;
  d.cartan(1, 0) = -2;  // affine A1
  CHECK_THROWS_AS(validate(d), std::invalid_argument);
  d = cartan_datum('B', 3);
  d.type_letter = 'C';
  CHECK_THROWS_AS(validate(d), std::invalid_argument);
  CHECK_THROWS_AS(cartan_datum('E', 5), std::invalid_argument);
}

TEST_CASE("enumeration cap is a resource error") {
  auto rs = build_root_system(cartan_datum('A', 4));
  CHECK_THROWS_AS(weyl_elements(rs, 50), std::length_error);
}

TEST_CASE("parabolic data examples") {
  auto X = make_space('A', 1, {});
  CHECK(X.n() == 2);
  CHECK(X.P.ell == 1);
  CHECK(word_string(X.W.words[X.P.wP]) == "s1");

  auto Y = make_space('A', 2, {2});
  REQUIRE(Y.n() == 3);
  CHECK(word_string(Y.W.words[Y.P.WP[0]]) == "e");
  CHECK(word_string(Y.W.words[Y.P.WP[1]]) == "s1");
  CHECK(word_string(Y.W.words[Y.P.WP[2]]) == "s2s1");
  CHECK(Y.P.ell == 2);

  auto Z = make_space("Gr24");
  CHECK(Z.n() == 6);
  CHECK(Z.P.ell == 4);
  CHECK(Z.P.c1_pairing == IntVec{4});

  CHECK(make_space("P2").P.c1_pairing == IntVec{3});
  CHECK(make_space("Fl3").P.c1_pairing == IntVec({2, 2}));
}

TEST_CASE("Fano index of type B and C minuscule-type quotients") {
  for (int n = 2; n <= 4; ++n) {
    IntVec ip;
    for (int i = 2; i <= n; ++i) ip.push_back(i);
    CHECK(make_space('B', n, ip).P.c1_pairing == IntVec{2 * n - 1});
    CHECK(make_space('C', n, ip).P.c1_pairing == IntVec{2 * n});
  }
}

TEST_CASE("W^P characterization and cardinality") {
  std::vector<std::tuple<char, int, IntVec>> cases = {
      {'A', 3, {1, 3}}, {'A', 3, {2}}, {'B', 3, {1}}, {'G', 2, {2}}, {'C', 3, {2, 3}}};
  for (auto& [t, r, ip] : cases) {
    auto X = make_space(t, r, ip);
    // |W_P| by BFS over Levi generators
    std::map<int, bool> wp;
    std::vector<int> stack = {0};
    wp[0] = true;
    while (!stack.empty()) {
      int w = stack.back();
      stack.pop_back();
      for (int i : X.P.IP) {
        int u = X.W.right[w][i];
        if (!wp.count(u)) {
          wp[u] = true;
          stack.push_back(u);
        }
      }
    }
    CHECK(X.P.WP.size() * wp.size() == X.W.size());
    int count = 0;
    for (std::size_t w = 0; w < X.W.size(); ++w) {
      bool ok = true;
      for (int i : X.P.IP) {
        IntVec e(r, 0);
        e[i] = 1;
        ok = ok && is_positive(X.W.act_coroot((int)w, e));
      }
      count += ok;
      CHECK(ok == (X.P.pos.count((int)w) == 1));
    }
    CHECK(count == X.n());
    // sorted by (length, word)
    for (int k = 1; k < X.n(); ++k) {
      int a = X.P.WP[k - 1], b = X.P.WP[k];
      CHECK(std::make_pair(X.W.length[a], X.W.words[a]) <
            std::make_pair(X.W.length[b], X.W.words[b]));
    }
    CHECK((std::size_t)X.P.ell == tangent_coroots_at_e(X.rs, X.P.IP).size());
  }
}

TEST_CASE("beta multiset equals inversion set for every reduced word") {
  for (auto [t, r] : std::vector<std::pair<char, int>>{{'A', 3}, {'B', 2}, {'G', 2}}) {
    auto rs = build_root_system(cartan_datum(t, r));
    auto W = weyl_elements(rs);
    for (std::size_t w = 0; w < W.size(); ++w) {
      auto expect = sorted(inversion_coroots(rs, W, (int)w));
      for (const auto& word : reduced_words(W, (int)w)) {
        CHECK(W.from_word(word) == (int)w);
        CHECK(sorted(beta_sequence(rs, W, word)) == expect);
      }
    }
  }
}

TEST_CASE("beta sequence of w_P examples") {
  auto X = make_space('A', 1, {});
  CHECK(beta_sequence(X.rs, X.W, {0}) == std::vector<IntVec>{{-1}});
  auto Y = make_space('A', 2, {2});
  for (const auto& word : reduced_words(Y.W, Y.P.wP))
    CHECK(sorted(beta_sequence(Y.rs, Y.W, word)) == sorted({{-1, 0}, {-1, -1}}));
  CHECK_THROWS_AS(beta_sequence(Y.rs, Y.W, {0, 0}), std::invalid_argument);
}

TEST_CASE("JSON description") {
  auto j = to_json(make_space('A', 3, {1, 3}));
  CHECK(j["ell"] == 4);
  CHECK(j["WP_words"].size() == 6);
  CHECK(j["rank"] == 3);
  CHECK(j["type"] == "A");
}
