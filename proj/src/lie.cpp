#include "gammaflag/lie.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <gmpxx.h>

namespace gammaflag::lie {

namespace {

void chain(IntMat& a, int i, int j) {
  a(i, j) = -1;
  a(j, i) = -1;
}

}  // namespace

CartanDatum cartan_datum(char t, int r) {
  CartanDatum d;
  d.type_letter = t;
  d.rank = r;
  IntMat a = IntMat::Zero(r, r);
  for (int i = 0; i < r; ++i) a(i, i) = 2;
  auto need = [&](bool ok) {
    if (!ok)
      throw std::invalid_argument(std::string("no simple root system of type ") + t +
                                  std::to_string(r));
  };
  switch (t) {
    case 'A':
      need(r >= 1);
      for (int i = 0; i + 1 < r; ++i) chain(a, i, i + 1);
      break;
    case 'B':
      need(r >= 2);
      for (int i = 0; i + 1 < r; ++i) chain(a, i, i + 1);
      a(r - 1, r - 2) = -2;
      break;
    case 'C':
      need(r >= 2);
      for (int i = 0; i + 1 < r; ++i) chain(a, i, i + 1);
      a(r - 2, r - 1) = -2;
      break;
    case 'D':
      need(r >= 4);
      for (int i = 0; i + 2 < r; ++i) chain(a, i, i + 1);
      chain(a, r - 3, r - 1);
      break;
    case 'E':
      need(r >= 6 && r <= 8);
      chain(a, 0, 2);
      chain(a, 1, 3);
      for (int i = 2; i + 1 < r; ++i) chain(a, i, i + 1);
      break;
    case 'F':
      need(r == 4);
      chain(a, 0, 1);
      chain(a, 2, 3);
      a(1, 2) = -1;
      a(2, 1) = -2;
      break;
    case 'G':
      need(r == 2);
      a(0, 1) = -3;
      a(1, 0) = -1;
      break;
    default:
      need(false);
  }
  d.cartan = a;
  return d;
}

void validate(const CartanDatum& d) {
  const IntMat& a = d.cartan;
  int r = d.rank;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("invalid Cartan matrix: " + why);
  };
  if (r < 1 || a.rows() != r || a.cols() != r) fail("shape does not match rank");
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      if (i == j && a(i, j) != 2) fail("diagonal entry (" + std::to_string(i + 1) + ") != 2");
      if (i != j && a(i, j) > 0) fail("positive off-diagonal entry");
      if (i != j && ((a(i, j) == 0) != (a(j, i) == 0))) fail("zero pattern not symmetric");
    }
  // symmetrize: find d_i with d_i a_ij = d_j a_ji
  std::vector<mpq_class> dd(r, 0);
  std::vector<bool> seen(r, false);
  std::deque<int> q;
  int comps = 0;
  for (int s = 0; s < r; ++s) {
    if (seen[s]) continue;
    ++comps;
    seen[s] = true;
    dd[s] = 1;
    q.push_back(s);
    while (!q.empty()) {
      int i = q.front();
      q.pop_front();
      for (int j = 0; j < r; ++j) {
        if (i == j || a(i, j) == 0) continue;
        mpq_class dj = dd[i] * a(i, j) / mpq_class(a(j, i));
        if (!seen[j]) {
          seen[j] = true;
          dd[j] = dj;
          q.push_back(j);
        } else if (dd[j] != dj) {
          fail("not symmetrizable");
        }
      }
    }
  }
  if (comps != 1) fail("Dynkin diagram is not connected");
  // positive definiteness of the symmetrized matrix via leading minors (exact)
  std::vector<std::vector<mpq_class>> s(r, std::vector<mpq_class>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) s[i][j] = dd[i] * a(i, j);
  for (int k = 0; k < r; ++k) {
    if (s[k][k] <= 0) fail("not of finite type (not positive definite)");
    for (int i = k + 1; i < r; ++i) {
      mpq_class f = s[i][k] / s[k][k];
      for (int j = k; j < r; ++j) s[i][j] -= f * s[k][j];
    }
  }
  if (d.type_letter != 0) {
    CartanDatum ref;
    try {
      ref = cartan_datum(d.type_letter, r);
    } catch (const std::invalid_argument&) {
      fail(std::string("unknown type ") + d.type_letter + std::to_string(r));
    }
    if (ref.cartan != a) fail(std::string("matrix does not match type ") + d.type_letter);
  }
}

std::size_t expected_positive_root_count(char t, int r) {
  switch (t) {
    case 'A': return (std::size_t)r * (r + 1) / 2;
    case 'B':
    case 'C': return (std::size_t)r * r;
    case 'D': return (std::size_t)r * (r - 1);
    case 'E': return r == 6 ? 36 : r == 7 ? 63 : 120;
    case 'F': return 24;
    case 'G': return 6;
  }
  return 0;
}

bool is_positive(const IntVec& v) {
  bool nz = false;
  for (int x : v) {
    if (x < 0) return false;
    nz = nz || x != 0;
  }
  return nz;
}

bool is_negative(const IntVec& v) {
  bool nz = false;
  for (int x : v) {
    if (x > 0) return false;
    nz = nz || x != 0;
  }
  return nz;
}

int RootSystem::pairing(const IntVec& coroot, int j) const {
  int s = 0;
  for (int i = 0; i < rank(); ++i) s += coroot[i] * simple_pairing(i, j);
  return s;
}

int RootSystem::pairing_root(int i, const IntVec& root) const {
  int s = 0;
  for (int j = 0; j < rank(); ++j) s += root[j] * simple_pairing(i, j);
  return s;
}

int RootSystem::coroot_index(const IntVec& c) const {
  for (std::size_t k = 0; k < positive_coroots.size(); ++k)
    if (positive_coroots[k] == c) return (int)k;
  return -1;
}

int RootSystem::root_index(const IntVec& c) const {
  for (std::size_t k = 0; k < positive_roots.size(); ++k)
    if (positive_roots[k] == c) return (int)k;
  return -1;
}

RootSystem build_root_system(const CartanDatum& datum) {
  validate(datum);
  RootSystem rs;
  rs.datum = datum;
  int r = datum.rank;
  std::map<IntVec, IntVec> pairs;  // root -> coroot
  std::deque<std::pair<IntVec, IntVec>> q;
  for (int i = 0; i < r; ++i) {
    IntVec e(r, 0);
    e[i] = 1;
    pairs[e] = e;
    q.emplace_back(e, e);
  }
  while (!q.empty()) {
    auto [root, co] = q.front();
    q.pop_front();
    for (int i = 0; i < r; ++i) {
      IntVec nr = root, nc = co;
      int a = rs.pairing_root(i, root);
      int b = rs.pairing(co, i);
      nr[i] -= a;
      nc[i] -= b;
      if (!pairs.count(nr)) {
        pairs[nr] = nc;
        q.emplace_back(nr, nc);
        if (pairs.size() > 10000) throw std::runtime_error("root closure did not terminate");
      }
    }
  }
  std::vector<std::pair<IntVec, IntVec>> pos;
  for (auto& [root, co] : pairs) {
    if (is_positive(root) != is_positive(co))
      throw std::logic_error("root/coroot sign mismatch in closure");
    if (is_positive(root)) pos.emplace_back(root, co);
  }
  std::sort(pos.begin(), pos.end(), [](const auto& x, const auto& y) {
    int hx = std::accumulate(x.first.begin(), x.first.end(), 0);
    int hy = std::accumulate(y.first.begin(), y.first.end(), 0);
    if (hx != hy) return hx < hy;
    return x.first > y.first;
  });
  for (auto& [root, co] : pos) {
    rs.positive_roots.push_back(root);
    rs.positive_coroots.push_back(co);
  }
  std::size_t expect = expected_positive_root_count(datum.type_letter, r);
  if (expect && expect != rs.positive_roots.size())
    throw std::logic_error("positive root count mismatch for type");
  return rs;
}

std::string matrix_key(const IntMat& m) {
  std::string s;
  s.reserve(m.size() * 3);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      s += std::to_string(m(i, j));
      s += ',';
    }
  return s;
}

int WeylGroup::find(const IntMat& m) const {
  auto it = index.find(matrix_key(m));
  return it == index.end() ? -1 : it->second;
}

int WeylGroup::multiply(int a, int b) const {
  int w = a;
  for (int i : words[b]) w = right[w][i];
  return w;
}

int WeylGroup::from_word(const IntVec& word) const {
  int w = 0;
  for (int i : word) {
    if (i < 0 || i >= rank) throw std::invalid_argument("letter out of range in word");
    w = right[w][i];
  }
  return w;
}

int WeylGroup::longest() const {
  return (int)(std::max_element(length.begin(), length.end()) - length.begin());
}

IntVec WeylGroup::act_coroot(int w, const IntVec& v) const {
  IntVec out(rank, 0);
  const IntMat& m = coroot_action[w];
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) out[i] += m(i, j) * v[j];
  return out;
}

IntVec WeylGroup::act_root(int w, const IntVec& v) const {
  IntVec out(rank, 0);
  const IntMat& m = root_action[w];
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) out[i] += m(i, j) * v[j];
  return out;
}

WeylElement element(const WeylGroup& W, int w) { return {W.words[w], W.coroot_action[w]}; }

WeylGroup weyl_elements(const RootSystem& rs, std::size_t cap) {
  int r = rs.rank();
  WeylGroup W;
  W.rank = r;
  std::vector<IntMat> S(r), R(r);
  for (int i = 0; i < r; ++i) {
    S[i] = IntMat::Identity(r, r);
    R[i] = IntMat::Identity(r, r);
    for (int j = 0; j < r; ++j) {
      S[i](i, j) -= rs.simple_pairing(j, i);
      R[i](i, j) -= rs.simple_pairing(i, j);
    }
  }
  auto add = [&](const IntMat& c, const IntMat& rt, IntVec word) {
    W.index.emplace(matrix_key(c), (int)W.words.size());
    W.coroot_action.push_back(c);
    W.root_action.push_back(rt);
    W.length.push_back((int)word.size());
    W.words.push_back(std::move(word));
    if (W.words.size() > cap)
      throw std::length_error("Weyl group enumeration cap (" + std::to_string(cap) +
                              " elements) exceeded");
  };
  add(IntMat::Identity(r, r), IntMat::Identity(r, r), {});
  std::vector<int> level = {0};
  while (!level.empty()) {
    std::vector<int> next;
    for (int w : level)
      for (int i = 0; i < r; ++i) {
        IntMat c = W.coroot_action[w] * S[i];
        if (W.find(c) >= 0) continue;
        IntVec word = W.words[w];
        word.push_back(i);
        next.push_back((int)W.words.size());
        add(c, W.root_action[w] * R[i], std::move(word));
      }
    level = std::move(next);
  }
  std::size_t n = W.words.size();
  W.right.assign(n, std::vector<int>(r));
  W.left.assign(n, std::vector<int>(r));
  W.inverse.assign(n, 0);
  for (std::size_t w = 0; w < n; ++w)
    for (int i = 0; i < r; ++i) {
      W.right[w][i] = W.find(W.coroot_action[w] * S[i]);
      W.left[w][i] = W.find(S[i] * W.coroot_action[w]);
    }
  for (std::size_t w = 0; w < n; ++w) {
    int u = 0;
    for (auto it = W.words[w].rbegin(); it != W.words[w].rend(); ++it) u = W.right[u][*it];
    W.inverse[w] = u;
  }
  return W;
}

int reflection(const RootSystem& rs, const WeylGroup& W, int k) {
  int r = rs.rank();
  const IntVec& beta = rs.positive_roots[k];
  const IntVec& bco = rs.positive_coroots[k];
  IntMat m = IntMat::Identity(r, r);
  for (int j = 0; j < r; ++j) {
    int p = rs.pairing_root(j, beta);
    for (int i = 0; i < r; ++i) m(i, j) -= p * bco[i];
  }
  int w = W.find(m);
  if (w < 0) throw std::logic_error("reflection not found in Weyl group");
  return w;
}

bool root_in_levi(const IntVec& root, const IntVec& IP) {
  for (int j = 0; j < (int)root.size(); ++j)
    if (root[j] != 0 && std::find(IP.begin(), IP.end(), j) == IP.end()) return false;
  return true;
}

int ParabolicData::position(int w) const {
  auto it = pos.find(w);
  if (it == pos.end()) throw std::invalid_argument("element is not a minimal coset representative");
  return it->second;
}

bool ParabolicData::in_levi(int i) const { return std::find(IP.begin(), IP.end(), i) != IP.end(); }

int min_coset_rep(const WeylGroup& W, const IntVec& IP, int w) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i : IP) {
      int u = W.right[w][i];
      if (W.length[u] < W.length[w]) {
        w = u;
        changed = true;
      }
    }
  }
  return w;
}

int w_P(const RootSystem& rs, const WeylGroup& W, const IntVec& IP) {
  (void)rs;
  // longest element of W_P by BFS over the parabolic generators
  std::vector<char> seen(W.size(), 0);
  std::deque<int> q = {0};
  seen[0] = 1;
  int best = 0;
  while (!q.empty()) {
    int w = q.front();
    q.pop_front();
    if (W.length[w] > W.length[best]) best = w;
    for (int i : IP) {
      int u = W.right[w][i];
      if (!seen[u]) {
        seen[u] = 1;
        q.push_back(u);
      }
    }
  }
  return W.multiply(best, W.longest());
}

ParabolicData minimal_reps(const RootSystem& rs, const WeylGroup& W, const IntVec& IP) {
  int r = rs.rank();
  for (int i : IP)
    if (i < 0 || i >= r) throw std::invalid_argument("I_P index out of range");
  if ((int)IP.size() >= r) throw std::invalid_argument("I_P must be a proper subset of I");
  ParabolicData P;
  P.IP = IP;
  std::sort(P.IP.begin(), P.IP.end());
  P.IP.erase(std::unique(P.IP.begin(), P.IP.end()), P.IP.end());
  for (std::size_t w = 0; w < W.size(); ++w) {
    bool ok = true;
    for (int i : P.IP) ok = ok && W.length[W.right[w][i]] > W.length[w];
    if (ok) {
      P.pos[(int)w] = (int)P.WP.size();
      P.WP.push_back((int)w);
    }
  }
  P.wP = w_P(rs, W, P.IP);
  P.w0P = W.multiply(P.wP, W.inverse[W.longest()]);
  P.ell = W.length[P.wP];
  int count = 0;
  for (const auto& root : rs.positive_roots) count += root_in_levi(root, P.IP) ? 0 : 1;
  if (count != P.ell) throw std::logic_error("ell(w_P) != |R+ \\ R+_P|");
  for (int i = 0; i < r; ++i) {
    if (P.in_levi(i)) continue;
    P.divisors.push_back(i);
    int s = 0;
    for (std::size_t k = 0; k < rs.positive_roots.size(); ++k)
      if (!root_in_levi(rs.positive_roots[k], P.IP)) s += rs.pairing(rs.positive_coroots[k], i);
    P.c1_pairing.push_back(s);
  }
  return P;
}

std::vector<IntVec> beta_sequence(const RootSystem& rs, const WeylGroup& W, const IntVec& word) {
  std::vector<IntVec> out;
  int prefix = 0;
  for (int i : word) {
    if (i < 0 || i >= rs.rank()) throw std::invalid_argument("letter out of range in word");
    IntVec e(rs.rank(), 0);
    e[i] = 1;
    IntVec b = W.act_coroot(prefix, e);
    for (int& x : b) x = -x;
    out.push_back(b);
    int next = W.right[prefix][i];
    if (W.length[next] != W.length[prefix] + 1)
      throw std::invalid_argument("word " + word_string(word) + " is not reduced");
    prefix = next;
  }
  return out;
}

std::vector<IntVec> inversion_coroots(const RootSystem& rs, const WeylGroup& W, int w) {
  std::vector<IntVec> out;
  for (const auto& c : rs.positive_coroots) {
    IntVec img = W.act_coroot(w, c);
    if (is_negative(img)) out.push_back(img);
  }
  return out;
}

std::vector<IntVec> tangent_coroots_at_e(const RootSystem& rs, const IntVec& IP) {
  std::vector<IntVec> out;
  for (std::size_t k = 0; k < rs.positive_roots.size(); ++k) {
    if (root_in_levi(rs.positive_roots[k], IP)) continue;
    IntVec c = rs.positive_coroots[k];
    for (int& x : c) x = -x;
    out.push_back(c);
  }
  return out;
}

std::vector<IntVec> reduced_words(const WeylGroup& W, int w, std::size_t cap) {
  std::map<int, std::vector<IntVec>> memo;
  std::function<const std::vector<IntVec>&(int)> rec = [&](int u) -> const std::vector<IntVec>& {
    auto it = memo.find(u);
    if (it != memo.end()) return it->second;
    std::vector<IntVec> res;
    if (W.length[u] == 0) {
      res.push_back({});
    } else {
      for (int i = 0; i < W.rank; ++i) {
        int v = W.right[u][i];
        if (W.length[v] >= W.length[u]) continue;
        for (const auto& p : rec(v)) {
          IntVec q = p;
          q.push_back(i);
          res.push_back(std::move(q));
          if (res.size() > cap) throw std::length_error("reduced word enumeration cap exceeded");
        }
      }
    }
    std::sort(res.begin(), res.end());
    return memo.emplace(u, std::move(res)).first->second;
  };
  return rec(w);
}

std::string word_string(const IntVec& word) {
  if (word.empty()) return "e";
  std::string s;
  for (int i : word) s += "s" + std::to_string(i + 1);
  return s;
}

FlagSpace make_space(char t, int rank, const IntVec& IP_one_based, std::size_t cap) {
  FlagSpace X;
  X.rs = build_root_system(cartan_datum(t, rank));
  X.W = weyl_elements(X.rs, cap);
  IntVec ip;
  for (int i : IP_one_based) ip.push_back(i - 1);
  X.P = minimal_reps(X.rs, X.W, ip);
  std::ostringstream os;
  os << t << rank;
  if (!ip.empty()) {
    os << "/P{";
    for (std::size_t k = 0; k < X.P.IP.size(); ++k) os << (k ? "," : "") << X.P.IP[k] + 1;
    os << "}";
  }
  X.label = os.str();
  return X;
}

FlagSpace make_space(const std::string& spec, const IntVec& IP_one_based, std::size_t cap) {
  auto digits = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), ::isdigit);
  };
  FlagSpace X;
  if (spec.size() >= 2 && spec[0] == 'P' && digits(spec.substr(1))) {
    int n = std::stoi(spec.substr(1));
    IntVec ip;
    for (int i = 2; i <= n; ++i) ip.push_back(i);
    X = make_space('A', n, ip, cap);
  } else if (spec.size() == 4 && spec.rfind("Gr", 0) == 0 && digits(spec.substr(2))) {
    int k = spec[2] - '0', n = spec[3] - '0';
    if (k < 1 || k >= n) throw std::invalid_argument("bad Grassmannian label " + spec);
    IntVec ip;
    for (int i = 1; i < n; ++i)
      if (i != k) ip.push_back(i);
    X = make_space('A', n - 1, ip, cap);
  } else if (spec.size() >= 3 && spec.rfind("Fl", 0) == 0 && digits(spec.substr(2))) {
    int n = std::stoi(spec.substr(2));
    X = make_space('A', n - 1, {}, cap);
  } else if (spec.size() >= 2 && std::string("ABCDEFG").find(spec[0]) != std::string::npos &&
             digits(spec.substr(1))) {
    return make_space(spec[0], std::stoi(spec.substr(1)), IP_one_based, cap);
  } else {
    throw std::invalid_argument("unknown space '" + spec + "'");
  }
  X.label = spec;
  return X;
}

nlohmann::json to_json(const FlagSpace& X) {
  using nlohmann::json;
  json j;
  j["space"] = X.label;
  j["type"] = std::string(1, X.rs.datum.type_letter);
  j["rank"] = X.rs.rank();
  json ip = json::array();
  for (int i : X.P.IP) ip.push_back(i + 1);
  j["ip"] = ip;
  j["positive_roots"] = X.rs.positive_roots;
  j["positive_coroots"] = X.rs.positive_coroots;
  json wp = json::array();
  for (int w : X.P.WP) wp.push_back(word_string(X.W.words[w]));
  j["WP_words"] = wp;
  j["WP_size"] = X.P.WP.size();
  j["ell"] = X.P.ell;
  j["wP_word"] = word_string(X.W.words[X.P.wP]);
  json c1 = json::object();
  for (std::size_t k = 0; k < X.P.divisors.size(); ++k)
    c1[std::to_string(X.P.divisors[k] + 1)] = X.P.c1_pairing[k];
  j["c1_pairings"] = c1;
  auto betas = beta_sequence(X.rs, X.W, X.W.words[X.P.wP]);
  std::sort(betas.begin(), betas.end());
  j["beta_multiset"] = betas;
  return j;
}

}  // namespace gammaflag::lie
