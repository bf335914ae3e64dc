#pragma once

#include <complex>
#include <map>
#include <string>
#include <type_traits>
#include <vector>

#include <gmpxx.h>

namespace gammaflag {

using Rational = mpq_class;
using Monomial = std::vector<int>;

// Sparse multivariate Laurent polynomial with exact rational coefficients.
// Terms are kept in a std::map ordered lexicographically on exponent vectors,
// so the leading term in lex order is terms().rbegin().
class Poly {
 public:
  Poly() = default;
  explicit Poly(int nvars) : nvars_(nvars) {}

  static Poly constant(int nvars, const Rational& c);
  static Poly variable(int nvars, int i);
  static Poly term(int nvars, const Monomial& m, const Rational& c);
  static Poly linear(int nvars, const std::vector<Rational>& coeffs);

  int nvars() const { return nvars_; }
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational coeff(const Monomial& m) const;
  Rational constant_term() const;

  Poly& operator+=(const Poly& o);
  Poly& operator-=(const Poly& o);
  Poly& operator*=(const Poly& o);
  Poly& operator*=(const Rational& c);
  Poly operator-() const;
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend Poly operator*(Poly a, const Rational& c) { return a *= c; }
  friend Poly operator*(const Rational& c, Poly a) { return a *= c; }
  bool operator==(const Poly& o) const;
  bool operator!=(const Poly& o) const { return !(*this == o); }

  Poly pow(int k) const;

  // Largest total degree among terms; -1 for the zero polynomial.
  int total_degree() const;
  int min_total_degree() const;
  // Weighted degree: sum_i w_i e_i. Returns false in *homog if terms disagree.
  long weighted_degree(const std::vector<int>& w, bool* homog = nullptr) const;
  int degree_in(int var) const;
  int min_degree_in(int var) const;

  // x_i d/dx_i.
  Poly euler(int var) const;
  Poly derivative(int var) const;
  // Set x_var = value (value must be nonzero if negative exponents occur).
  Poly specialize(int var, const Rational& value) const;
  // x_var -> factor * x_var.
  Poly scale_var(int var, const Rational& factor) const;
  // Append variables (new variables have exponent 0); or drop trailing ones
  // that are absent.
  Poly resize(int new_nvars) const;
  // Keep only terms of given total degree in the listed variables.
  Poly part_of_degree(const std::vector<int>& vars, int deg) const;

  // Exact division; throws std::domain_error on a nonzero remainder.
  Poly divide_exact(const Poly& d) const;

  template <class T>
  T eval(const std::vector<T>& pt) const;

  double max_abs_coeff() const;
  std::string str(const std::vector<std::string>& names = {}) const;

 private:
  int nvars_ = 0;
  std::map<Monomial, Rational> terms_;
  void add_term(const Monomial& m, const Rational& c);
};

double to_double(const Rational& q);

template <class T>
T from_rational(const Rational& q) {
  if constexpr (std::is_same_v<T, Rational>)
    return q;
  else
    return T(q.get_d());
}

template <class T>
T ipow(T x, int e) {
  if (e < 0) return T(1) / ipow(x, -e);
  T r(1);
  while (e) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

template <class T>
T Poly::eval(const std::vector<T>& pt) const {
  T acc(0);
  for (const auto& [m, c] : terms_) {
    T v;
    if constexpr (std::is_same_v<T, Rational>) {
      v = c;
    } else {
      v = T(to_double(c));
    }
    for (int i = 0; i < nvars_; ++i)
      if (m[i] != 0) v *= ipow(pt[i], m[i]);
    acc += v;
  }
  return acc;
}

// Dense matrices of polynomials, used for operator tables.
using PolyMatrix = std::vector<std::vector<Poly>>;
PolyMatrix poly_matmul(const PolyMatrix& a, const PolyMatrix& b);
PolyMatrix poly_zero_matrix(int n, int nvars);

}  // namespace gammaflag
