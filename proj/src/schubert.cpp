#include "gammaflag/schubert.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gammaflag::schubert {

EquivPoly coroot_form(const lie::RootSystem& rs, const IntVec& coroot, int nvars) {
  int r = rs.rank();
  std::vector<Rational> c(r);
  for (int j = 0; j < r; ++j) c[j] = rs.pairing(coroot, j);
  return Poly::linear(nvars < 0 ? r : nvars, c);
}

cplx coroot_value(const lie::RootSystem& rs, const IntVec& coroot, const std::vector<cplx>& h) {
  cplx s = 0;
  for (int j = 0; j < rs.rank(); ++j) s += double(rs.pairing(coroot, j)) * h[j];
  return s;
}

std::vector<cplx> act_on_h(const lie::WeylGroup& W, int w, const std::vector<cplx>& h) {
  std::vector<cplx> out(W.rank, 0.0);
  const auto& m = W.root_action[w];
  for (int i = 0; i < W.rank; ++i)
    for (int j = 0; j < W.rank; ++j) out[i] += double(m(i, j)) * h[j];
  return out;
}

Schubert::Schubert(const FlagSpace& X) : X_(X) {
  int nn = n(), r = nvars();
  const auto& W = X_.W;
  restr_.assign(nn, std::vector<EquivPoly>(nn, Poly(r)));
  for (int w = 0; w < nn; ++w) {
    int we = X_.P.WP[w];
    std::map<int, Poly> st;
    st.emplace(0, Poly::constant(r, 1));
    int prefix = 0;
    for (int i : W.words[we]) {
      IntVec e(r, 0);
      e[i] = 1;
      Poly beta = coroot_form(X_.rs, W.act_coroot(prefix, e));
      std::map<int, Poly> next = st;
      for (const auto& [u, p] : st) {
        int u2 = W.right[u][i];
        if (W.length[u2] > W.length[u]) next[u2] += p * beta;
      }
      st = std::move(next);
      prefix = W.right[prefix][i];
    }
    for (auto& [u, p] : st) {
      auto it = X_.P.pos.find(u);
      if (it != X_.P.pos.end()) restr_[it->second][w] = p;
    }
  }
  auto tangent = lie::tangent_coroots_at_e(X_.rs, X_.P.IP);
  weights_.resize(nn);
  euler_.resize(nn);
  for (int w = 0; w < nn; ++w) {
    Poly e = Poly::constant(r, 1);
    for (const auto& c : tangent) {
      weights_[w].push_back(W.act_coroot(X_.P.WP[w], c));
      e *= coroot_form(X_.rs, weights_[w].back());
    }
    euler_[w] = e;
  }
  all_roots_ = Poly::constant(r, 1);
  for (const auto& c : X_.rs.positive_coroots) all_roots_ *= coroot_form(X_.rs, c);
}

EquivPoly Schubert::billey(int v_elem, const IntVec& word) const {
  const auto& W = X_.W;
  int r = nvars();
  std::map<int, Poly> st;
  st.emplace(0, Poly::constant(r, 1));
  int prefix = 0;
  for (int i : word) {
    int nextp = W.right[prefix][i];
    if (W.length[nextp] != W.length[prefix] + 1)
      throw std::invalid_argument("billey: word is not reduced");
    IntVec e(r, 0);
    e[i] = 1;
    Poly beta = coroot_form(X_.rs, W.act_coroot(prefix, e));
    std::map<int, Poly> next = st;
    for (const auto& [u, p] : st) {
      int u2 = W.right[u][i];
      if (W.length[u2] > W.length[u]) next[u2] += p * beta;
    }
    st = std::move(next);
    prefix = nextp;
  }
  auto it = st.find(v_elem);
  return it == st.end() ? Poly(r) : it->second;
}

std::vector<EquivPoly> Schubert::class_from_restrictions(const std::vector<EquivPoly>& r) const {
  int nn = n();
  if ((int)r.size() != nn) throw std::invalid_argument("restriction vector has wrong size");
  std::vector<EquivPoly> c(nn, Poly(nvars()));
  // W^P is sorted by length, so sigma_u|_v = 0 for u after v.
  for (int v = 0; v < nn; ++v) {
    Poly rem = r[v].resize(nvars());
    for (int u = 0; u < v; ++u)
      if (!c[u].is_zero() && !restr_[u][v].is_zero()) rem -= c[u] * restr_[u][v];
    if (rem.is_zero()) continue;
    try {
      c[v] = rem.divide_exact(restr_[v][v]);
    } catch (const std::domain_error&) {
      throw std::domain_error("restrictions do not define a class (fails at fixed point " +
                              lie::word_string(X_.W.words[X_.P.WP[v]]) + ")");
    }
  }
  return c;
}

std::vector<EquivPoly> Schubert::restrictions_from_class(const std::vector<EquivPoly>& c) const {
  int nn = n();
  std::vector<EquivPoly> r(nn, Poly(nvars()));
  for (int v = 0; v < nn; ++v) {
    if (c[v].is_zero()) continue;
    for (int w = v; w < nn; ++w)
      if (!restr_[v][w].is_zero()) r[w] += c[v] * restr_[v][w];
  }
  return r;
}

CohClass Schubert::from_coeffs(std::vector<EquivPoly> c) const {
  CohClass a;
  a.coeffs = std::move(c);
  a.has_coeffs = true;
  return a;
}

CohClass Schubert::from_restrictions(std::vector<EquivPoly> r) const {
  CohClass a;
  a.restr = std::move(r);
  a.has_restr = true;
  return a;
}

void Schubert::ensure_both(CohClass& a) const {
  if (!a.has_restr && a.has_coeffs) {
    a.restr = restrictions_from_class(a.coeffs);
    a.has_restr = true;
  }
  if (!a.has_coeffs && a.has_restr) {
    a.coeffs = class_from_restrictions(a.restr);
    a.has_coeffs = true;
  }
  if (!a.has_coeffs) throw std::invalid_argument("empty class");
}

CohClass Schubert::schubert_class(int v) const {
  std::vector<EquivPoly> c(n(), Poly(nvars()));
  c.at(v) = Poly::constant(nvars(), 1);
  CohClass a = from_coeffs(std::move(c));
  a.restr = restr_[v];
  a.has_restr = true;
  return a;
}

CohClass Schubert::cup(const CohClass& a0, const CohClass& b0) const {
  CohClass a = a0, b = b0;
  ensure_both(a);
  ensure_both(b);
  std::vector<EquivPoly> r(n());
  for (int w = 0; w < n(); ++w) r[w] = a.restr[w] * b.restr[w];
  CohClass out = from_restrictions(std::move(r));
  ensure_both(out);
  return out;
}

EquivPoly Schubert::integrate(const std::vector<EquivPoly>& restr) const {
  int r = nvars();
  const auto& pc = X_.rs.positive_coroots;
  Poly total(r);
  for (int w = 0; w < n(); ++w) {
    if (restr[w].is_zero()) continue;
    // all_roots / e_w as a product over the complementary positive coroots
    std::set<IntVec> used;
    int sign = 1;
    for (const auto& c : weights_[w]) {
      IntVec a = c;
      if (lie::is_negative(a)) {
        sign = -sign;
        for (int& x : a) x = -x;
      }
      used.insert(a);
    }
    Poly cof = Poly::constant(r, sign);
    for (const auto& c : pc)
      if (!used.count(c)) cof *= coroot_form(X_.rs, c);
    total += restr[w].resize(r) * cof;
  }
  if (total.is_zero()) return total;
  return total.divide_exact(all_roots_);
}

EquivPoly Schubert::integrate(const CohClass& a0) const {
  CohClass a = a0;
  ensure_both(a);
  return integrate(a.restr);
}

std::vector<cplx> Schubert::restriction_values(int v, const std::vector<cplx>& h) const {
  std::vector<cplx> out(n());
  for (int w = 0; w < n(); ++w) out[w] = restr_[v][w].eval(h);
  return out;
}

void Schubert::check_regular(const std::vector<cplx>& h, double margin) const {
  double norm = 0;
  for (auto x : h) norm = std::max(norm, std::abs(x));
  if (norm == 0)
    throw std::domain_error("h = 0 lies on every root wall; use the nonequivariant route");
  for (const auto& c : X_.rs.positive_coroots) {
    double v = std::abs(coroot_value(X_.rs, c, h));
    if (v < margin * norm)
    {
      std::string cs;
      for (int x : c) cs += (cs.empty() ? "" : ",") + std::to_string(x);
      throw std::domain_error("h too close to the wall of coroot (" + cs +
                              "): |value| = " + std::to_string(v));
    }
  }
}

std::vector<cplx> Schubert::coeffs_from_restriction_values(const std::vector<cplx>& r,
                                                           const std::vector<cplx>& h,
                                                           double margin) const {
  check_regular(h, margin);
  int nn = n();
  std::vector<cplx> c(nn, 0.0);
  for (int v = 0; v < nn; ++v) {
    cplx rem = r[v];
    for (int u = 0; u < v; ++u)
      if (c[u] != 0.0 && !restr_[u][v].is_zero()) rem -= c[u] * restr_[u][v].eval(h);
    cplx piv = restr_[v][v].eval(h);
    if (piv == 0.0) throw std::domain_error("zero pivot at position " + std::to_string(v));
    c[v] = rem / piv;
  }
  return c;
}

cplx Schubert::integrate_numeric(const std::vector<cplx>& r, const std::vector<cplx>& h,
                                 double margin) const {
  check_regular(h, margin);
  cplx s = 0;
  for (int w = 0; w < n(); ++w) s += r[w] / euler_[w].eval(h);
  return s;
}

void Schubert::build_pairing() const {
  if (!pairing_.empty()) return;
  int nn = n(), ell = X_.P.ell;
  std::vector<std::vector<EquivPoly>> G(nn, std::vector<EquivPoly>(nn, Poly(nvars())));
  for (int u = 0; u < nn; ++u)
    for (int v = u; v < nn; ++v) {
      if (length(u) + length(v) < ell) continue;
      std::vector<EquivPoly> r(nn, Poly(nvars()));
      for (int w = v; w < nn; ++w) r[w] = restr_[u][w] * restr_[v][w];
      G[u][v] = G[v][u] = integrate(r);
    }
  std::vector<std::vector<Rational>> G0(nn, std::vector<Rational>(nn, 0));
  IntVec vee(nn, -1);
  for (int u = 0; u < nn; ++u)
    for (int v = 0; v < nn; ++v) {
      if (length(u) + length(v) != ell) continue;
      G0[u][v] = G[u][v].constant_term();
      if (G0[u][v] != 0) {
        if (G0[u][v] != 1 || vee[u] >= 0)
          throw std::logic_error("nonequivariant pairing is not a permutation matrix");
        vee[u] = v;
      }
    }
  for (int u = 0; u < nn; ++u)
    if (vee[u] < 0) throw std::logic_error("missing Poincare dual");
  pairing_ = std::move(G);
  pairing0_ = std::move(G0);
  vee_ = std::move(vee);
}

const std::vector<std::vector<EquivPoly>>& Schubert::pairing() const {
  std::lock_guard<std::mutex> lock(mu_);
  build_pairing();
  return pairing_;
}

const std::vector<std::vector<Rational>>& Schubert::pairing0() const {
  std::lock_guard<std::mutex> lock(mu_);
  build_pairing();
  return pairing0_;
}

int Schubert::vee(int v) const {
  std::lock_guard<std::mutex> lock(mu_);
  build_pairing();
  return vee_.at(v);
}

void Schubert::build_dual() const {
  if (!dual_.empty()) return;
  build_pairing();
  int nn = n();
  // G'_{u,w} = G_{u,w^vee} is block lower unitriangular by length; solve
  // G' Y = I by forward substitution, then D^T = P Y.
  std::vector<std::vector<EquivPoly>> D(nn, std::vector<EquivPoly>(nn, Poly(nvars())));
  for (int col = 0; col < nn; ++col) {
    std::vector<EquivPoly> Y(nn, Poly(nvars()));
    for (int u = 0; u < nn; ++u) {
      Poly y = Poly::constant(nvars(), u == col ? 1 : 0);
      for (int w = 0; w < nn; ++w) {
        if (length(w) >= length(u) || Y[w].is_zero()) continue;
        const Poly& g = pairing_[u][vee_[w]];
        if (!g.is_zero()) y -= g * Y[w];
      }
      Y[u] = y;
    }
    for (int w = 0; w < nn; ++w) D[col][vee_[w]] = Y[w];
  }
  dual_ = std::move(D);
}

const std::vector<EquivPoly>& Schubert::dual_coeffs(int v) const {
  std::lock_guard<std::mutex> lock(mu_);
  build_dual();
  return dual_.at(v);
}

CohClass Schubert::dual_class(int v) const { return from_coeffs(dual_coeffs(v)); }

const std::vector<Rational>& Schubert::cup0(int u, int v) const {
  if (u > v) std::swap(u, v);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cup0_.find({u, v});
    if (it != cup0_.end()) return it->second;
  }
  std::vector<Rational> out(n(), 0);
  if (length(u) + length(v) <= X_.P.ell) {
    std::vector<EquivPoly> r(n(), Poly(nvars()));
    for (int w = 0; w < n(); ++w) r[w] = restr_[u][w] * restr_[v][w];
    auto c = class_from_restrictions(r);
    for (int w = 0; w < n(); ++w)
      if (length(w) == length(u) + length(v)) out[w] = c[w].constant_term();
  }
  std::lock_guard<std::mutex> lock(mu_);
  return cup0_.emplace(std::make_pair(u, v), std::move(out)).first->second;
}

std::string Schubert::restriction_csv() const {
  std::ostringstream os;
  std::vector<std::string> names;
  for (int j = 0; j < nvars(); ++j) names.push_back("h" + std::to_string(j + 1));
  os << "v,w,restriction\n";
  for (int v = 0; v < n(); ++v)
    for (int w = 0; w < n(); ++w)
      os << lie::word_string(X_.W.words[X_.P.WP[v]]) << ','
         << lie::word_string(X_.W.words[X_.P.WP[w]]) << ",\"" << restr_[v][w].str(names)
         << "\"\n";
  return os.str();
}

std::string Schubert::pairing_csv() const {
  const auto& G = pairing();
  std::ostringstream os;
  std::vector<std::string> names;
  for (int j = 0; j < nvars(); ++j) names.push_back("h" + std::to_string(j + 1));
  os << "u,v,pairing\n";
  for (int u = 0; u < n(); ++u)
    for (int v = 0; v < n(); ++v)
      os << lie::word_string(X_.W.words[X_.P.WP[u]]) << ','
         << lie::word_string(X_.W.words[X_.P.WP[v]]) << ",\"" << G[u][v].str(names) << "\"\n";
  return os.str();
}

}  // namespace gammaflag::schubert
