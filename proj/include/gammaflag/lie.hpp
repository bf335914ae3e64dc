#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace gammaflag::lie {

using IntVec = std::vector<int>;
using IntMat = Eigen::MatrixXi;

// Cartan matrix of the group whose flag variety is studied, Bourbaki
// numbering, a_ij = <coroot_i, root_j>. In the library's naming the roots of
// that group are the "coroots" alpha^vee and its coroots are the "roots"
// alpha, so alpha^vee_i(alpha_j) = a_ji.
struct CartanDatum {
  char type_letter = 'A';
  int rank = 1;
  IntMat cartan;
};

CartanDatum cartan_datum(char type_letter, int rank);
// Throws std::invalid_argument with a diagnostic if the matrix is not a
// Cartan matrix of finite type (or does not match the named type).
void validate(const CartanDatum& d);

struct RootSystem {
  CartanDatum datum;
  // Same indexing: positive_coroots[k] is the coroot of positive_roots[k].
  std::vector<IntVec> positive_roots;    // in simple roots alpha_i
  std::vector<IntVec> positive_coroots;  // in simple coroots alpha^vee_i

  int rank() const { return datum.rank; }
  // alpha^vee_i(alpha_j)
  int simple_pairing(int i, int j) const { return datum.cartan(j, i); }
  // alpha^vee(alpha_j) for a coroot given in simple-coroot coordinates.
  int pairing(const IntVec& coroot, int j) const;
  // alpha^vee_i(alpha) for a root given in simple-root coordinates.
  int pairing_root(int i, const IntVec& root) const;
  int coroot_index(const IntVec& coroot) const;  // -1 if not a positive coroot
  int root_index(const IntVec& root) const;
};

RootSystem build_root_system(const CartanDatum& datum);
std::size_t expected_positive_root_count(char type_letter, int rank);

bool is_positive(const IntVec& v);
bool is_negative(const IntVec& v);

struct WeylGroup {
  int rank = 0;
  std::vector<IntMat> coroot_action;  // columns: images of simple coroots
  std::vector<IntMat> root_action;    // columns: images of simple roots
  std::vector<IntVec> words;          // lexicographically minimal reduced words
  std::vector<int> length;
  std::vector<std::vector<int>> right;  // right[w][i] = index of w s_i
  std::vector<std::vector<int>> left;   // left[w][i] = index of s_i w
  std::vector<int> inverse;
  std::unordered_map<std::string, int> index;

  std::size_t size() const { return words.size(); }
  int find(const IntMat& coroot_matrix) const;  // -1 if absent
  int multiply(int a, int b) const;
  int from_word(const IntVec& word) const;
  int longest() const;
  IntVec act_coroot(int w, const IntVec& v) const;
  IntVec act_root(int w, const IntVec& v) const;
};

struct WeylElement {
  IntVec word;
  IntMat canonical_form;
  bool operator==(const WeylElement& o) const { return canonical_form == o.canonical_form; }
};
WeylElement element(const WeylGroup& W, int w);

WeylGroup weyl_elements(const RootSystem& rs, std::size_t cap = 1000000);

std::string matrix_key(const IntMat& m);

// Index of the reflection s_beta for a positive root beta (as coroot index k).
int reflection(const RootSystem& rs, const WeylGroup& W, int k);

struct ParabolicData {
  IntVec IP;   // 0-based indices of the Levi simple roots
  IntVec WP;   // indices into WeylGroup, sorted by (length, lex word)
  int ell = 0;
  int wP = 0;  // index of w_P = w_0^P w_0
  int w0P = 0;
  std::unordered_map<int, int> pos;  // group index -> position in WP
  IntVec divisors;                   // I \ I_P (0-based)
  IntVec c1_pairing;                 // <c1, beta_i> = sum over R+\R+_P of alpha^vee(alpha_i), per divisor

  int position(int w) const;
  bool in_levi(int i) const;
};

ParabolicData minimal_reps(const RootSystem& rs, const WeylGroup& W, const IntVec& IP);
int w_P(const RootSystem& rs, const WeylGroup& W, const IntVec& IP);
int min_coset_rep(const WeylGroup& W, const IntVec& IP, int w);
bool root_in_levi(const IntVec& root, const IntVec& IP);

// beta^vee_k = -s_{i1}...s_{i_{k-1}}(alpha^vee_{i_k}); throws on non-reduced input.
std::vector<IntVec> beta_sequence(const RootSystem& rs, const WeylGroup& W, const IntVec& word);
// {alpha^vee : alpha in wR+ cap (-R+)}
std::vector<IntVec> inversion_coroots(const RootSystem& rs, const WeylGroup& W, int w);
// {alpha^vee : alpha in -(R+ \ R+_P)}
std::vector<IntVec> tangent_coroots_at_e(const RootSystem& rs, const IntVec& IP);
std::vector<IntVec> reduced_words(const WeylGroup& W, int w, std::size_t cap = 100000);

// A flag variety G/P together with all combinatorial tables.
struct FlagSpace {
  std::string label;
  RootSystem rs;
  WeylGroup W;
  ParabolicData P;
  int n() const { return (int)P.WP.size(); }
  int rank() const { return rs.rank(); }
  int ndiv() const { return (int)P.divisors.size(); }
};

FlagSpace make_space(char type_letter, int rank, const IntVec& IP_one_based,
                     std::size_t cap = 1000000);
// Accepts labels P<n>, Gr<k><n>, Fl<n>, or a type like "A3" (then ip is used).
FlagSpace make_space(const std::string& spec, const IntVec& IP_one_based = {},
                     std::size_t cap = 1000000);

nlohmann::json to_json(const FlagSpace& X);
std::string word_string(const IntVec& word);  // 1-based, e.g. "s2s1" or "e"

}  // namespace gammaflag::lie
