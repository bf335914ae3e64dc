#include "gammaflag/poly.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gammaflag {

double to_double(const Rational& q) { return q.get_d(); }

Poly Poly::constant(int nvars, const Rational& c) {
  Poly p(nvars);
  p.add_term(Monomial(nvars, 0), c);
  return p;
}

Poly Poly::variable(int nvars, int i) {
  Monomial m(nvars, 0);
  m.at(i) = 1;
  return term(nvars, m, 1);
}

Poly Poly::term(int nvars, const Monomial& m, const Rational& c) {
  Poly p(nvars);
  p.add_term(m, c);
  return p;
}

Poly Poly::linear(int nvars, const std::vector<Rational>& coeffs) {
  Poly p(nvars);
  for (int i = 0; i < (int)coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    Monomial m(nvars, 0);
    m[i] = 1;
    p.add_term(m, coeffs[i]);
  }
  return p;
}

void Poly::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
  } else {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

bool Poly::is_constant() const {
  if (terms_.empty()) return true;
  if (terms_.size() > 1) return false;
  for (int e : terms_.begin()->first)
    if (e != 0) return false;
  return true;
}

Rational Poly::coeff(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? Rational(0) : it->second;
}

Rational Poly::constant_term() const { return coeff(Monomial(nvars_, 0)); }

Poly& Poly::operator+=(const Poly& o) {
  if (nvars_ == 0 && terms_.empty()) nvars_ = o.nvars_;
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Poly& Poly::operator-=(const Poly& o) {
  if (nvars_ == 0 && terms_.empty()) nvars_ = o.nvars_;
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  Poly r(std::max(a.nvars_, b.nvars_));
  Monomial m(r.nvars_);
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      for (int i = 0; i < r.nvars_; ++i) m[i] = ma[i] + mb[i];
      r.add_term(m, ca * cb);
    }
  return r;
}

Poly& Poly::operator*=(const Poly& o) {
  *this = *this * o;
  return *this;
}

Poly& Poly::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& kv : terms_) kv.second *= c;
  return *this;
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& kv : r.terms_) kv.second = -kv.second;
  return r;
}

bool Poly::operator==(const Poly& o) const { return terms_ == o.terms_; }

Poly Poly::pow(int k) const {
  Poly r = constant(nvars_, 1);
  Poly base = *this;
  while (k > 0) {
    if (k & 1) r *= base;
    k >>= 1;
    if (k) base *= base;
  }
  return r;
}

int Poly::total_degree() const {
  int d = -1;
  for (const auto& kv : terms_) {
    int s = 0;
    for (int e : kv.first) s += e;
    d = std::max(d, s);
  }
  return d;
}

int Poly::min_total_degree() const {
  int d = 1 << 30;
  for (const auto& kv : terms_) {
    int s = 0;
    for (int e : kv.first) s += e;
    d = std::min(d, s);
  }
  return terms_.empty() ? -1 : d;
}

long Poly::weighted_degree(const std::vector<int>& w, bool* homog) const {
  long d = 0;
  bool first = true, ok = true;
  for (const auto& kv : terms_) {
    long s = 0;
    for (int i = 0; i < nvars_; ++i) s += (long)w.at(i) * kv.first[i];
    if (first) {
      d = s;
      first = false;
    } else if (s != d) {
      ok = false;
      d = std::max(d, s);
    }
  }
  if (homog) *homog = ok;
  return d;
}

int Poly::degree_in(int var) const {
  int d = -(1 << 30);
  for (const auto& kv : terms_) d = std::max(d, kv.first[var]);
  return d;
}

int Poly::min_degree_in(int var) const {
  int d = 1 << 30;
  for (const auto& kv : terms_) d = std::min(d, kv.first[var]);
  return d;
}

Poly Poly::euler(int var) const {
  Poly r(nvars_);
  for (const auto& [m, c] : terms_)
    if (m[var] != 0) r.add_term(m, c * m[var]);
  return r;
}

Poly Poly::derivative(int var) const {
  Poly r(nvars_);
  for (const auto& [m, c] : terms_) {
    if (m[var] == 0) continue;
    Monomial mm = m;
    mm[var] -= 1;
    r.add_term(mm, c * m[var]);
  }
  return r;
}

Poly Poly::specialize(int var, const Rational& value) const {
  Poly r(nvars_);
  for (const auto& [m, c] : terms_) {
    Monomial mm = m;
    int e = mm[var];
    mm[var] = 0;
    if (e == 0) {
      r.add_term(mm, c);
    } else if (value != 0) {
      r.add_term(mm, c * ipow(value, e));
    } else if (e < 0) {
      throw std::domain_error("specialize: negative exponent at zero");
    }
  }
  return r;
}

Poly Poly::scale_var(int var, const Rational& factor) const {
  Poly r(nvars_);
  for (const auto& [m, c] : terms_) r.add_term(m, c * ipow(factor, m[var]));
  return r;
}

Poly Poly::resize(int new_nvars) const {
  Poly r(new_nvars);
  for (const auto& [m, c] : terms_) {
    Monomial mm(new_nvars, 0);
    for (int i = 0; i < nvars_; ++i) {
      if (i < new_nvars)
        mm[i] = m[i];
      else if (m[i] != 0)
        throw std::invalid_argument("Poly::resize drops a used variable");
    }
    r.add_term(mm, c);
  }
  return r;
}

Poly Poly::part_of_degree(const std::vector<int>& vars, int deg) const {
  Poly r(nvars_);
  for (const auto& [m, c] : terms_) {
    int s = 0;
    for (int v : vars) s += m[v];
    if (s == deg) r.add_term(m, c);
  }
  return r;
}

Poly Poly::divide_exact(const Poly& d) const {
  if (d.is_zero()) throw std::domain_error("division by zero polynomial");
  int n = std::max(nvars_, d.nvars_);
  Poly q(n), rem = *this;
  const auto& [ld, lc] = *d.terms_.rbegin();
  while (!rem.is_zero()) {
    const auto [lm, lcoef] = *rem.terms_.rbegin();
    Monomial qm(n);
    for (int i = 0; i < n; ++i) {
      qm[i] = lm[i] - ld[i];
      if (qm[i] < 0 && d.min_degree_in(i) >= 0 && min_degree_in(i) >= 0)
        throw std::domain_error("divide_exact: nonzero remainder");
    }
    Poly t = term(n, qm, lcoef / lc);
    q += t;
    rem -= t * d;
  }
  return q;
}

double Poly::max_abs_coeff() const {
  double m = 0;
  for (const auto& kv : terms_) m = std::max(m, std::fabs(kv.second.get_d()));
  return m;
}

std::string Poly::str(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    Rational cc = c;
    if (!first) os << (cc < 0 ? " - " : " + ");
    else if (cc < 0) os << "-";
    if (cc < 0) cc = -cc;
    bool unit = true;
    for (int e : m) unit = unit && e == 0;
    bool printed = cc != 1 || unit;
    if (printed) os << cc.get_str();
    for (int i = 0; i < nvars_; ++i) {
      if (m[i] == 0) continue;
      std::string nm = i < (int)names.size() ? names[i] : "x" + std::to_string(i + 1);
      os << (printed ? "*" : "") << nm;
      printed = true;
      if (m[i] != 1) os << "^" << m[i];
    }
    first = false;
  }
  return os.str();
}

PolyMatrix poly_zero_matrix(int n, int nvars) {
  return PolyMatrix(n, std::vector<Poly>(n, Poly(nvars)));
}

PolyMatrix poly_matmul(const PolyMatrix& a, const PolyMatrix& b) {
  int n = (int)a.size();
  int nv = n ? a[0][0].nvars() : 0;
  PolyMatrix c = poly_zero_matrix(n, nv);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (a[i][k].is_zero()) continue;
      for (int j = 0; j < n; ++j)
        if (!b[k][j].is_zero()) c[i][j] += a[i][k] * b[k][j];
    }
  return c;
}

}  // namespace gammaflag
