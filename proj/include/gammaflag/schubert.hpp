#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gammaflag/lie.hpp"
#include "gammaflag/numerics.hpp"
#include "gammaflag/poly.hpp"

namespace gammaflag::schubert {

using lie::FlagSpace;
using lie::IntVec;

// Equivariant parameters: h = sum_j x_j alpha_j, so the polynomial ring has
// one variable per simple root. A coroot alpha^vee acts as the linear form
// alpha^vee(h) = sum_j alpha^vee(alpha_j) x_j.
using EquivPoly = Poly;

EquivPoly coroot_form(const lie::RootSystem& rs, const IntVec& coroot, int nvars = -1);
cplx coroot_value(const lie::RootSystem& rs, const IntVec& coroot, const std::vector<cplx>& h);
// x-coordinates of w(h).
std::vector<cplx> act_on_h(const lie::WeylGroup& W, int w, const std::vector<cplx>& h);

// A class stored in either or both representations: Schubert coefficients
// (indexed by position in W^P) and restrictions to the fixed points.
struct CohClass {
  std::vector<EquivPoly> coeffs;
  std::vector<EquivPoly> restr;
  bool has_coeffs = false;
  bool has_restr = false;
};

class Schubert {
 public:
  // Keeps its own copy of the space.
  explicit Schubert(const FlagSpace& X);

  const FlagSpace& space() const { return X_; }
  int n() const { return X_.n(); }
  int nvars() const { return X_.rank(); }
  int length(int pos) const { return X_.W.length[X_.P.WP[pos]]; }

  // sigma_v|_w for positions v, w in W^P.
  const EquivPoly& restriction(int v, int w) const { return restr_[v][w]; }
  // Billey restriction for group elements, computed from an arbitrary reduced
  // word of w (used to test word independence).
  EquivPoly billey(int v_elem, const IntVec& word_of_w) const;

  // {w alpha^vee : alpha in -(R+ \ R+_P)} at position w.
  const std::vector<IntVec>& tangent_weights(int w) const { return weights_[w]; }
  const EquivPoly& euler(int w) const { return euler_[w]; }

  CohClass from_coeffs(std::vector<EquivPoly> c) const;
  CohClass from_restrictions(std::vector<EquivPoly> r) const;
  std::vector<EquivPoly> class_from_restrictions(const std::vector<EquivPoly>& r) const;
  std::vector<EquivPoly> restrictions_from_class(const std::vector<EquivPoly>& c) const;
  void ensure_both(CohClass& a) const;

  CohClass cup(const CohClass& a, const CohClass& b) const;
  CohClass schubert_class(int v) const;
  CohClass one() const { return schubert_class(0); }

  // Localization sum; exact, throws if denominators do not cancel.
  EquivPoly integrate(const std::vector<EquivPoly>& restr) const;
  EquivPoly integrate(const CohClass& a) const;

  // Numeric h: restriction values and triangular solve.
  std::vector<cplx> restriction_values(int v, const std::vector<cplx>& h) const;
  std::vector<cplx> coeffs_from_restriction_values(const std::vector<cplx>& r,
                                                   const std::vector<cplx>& h,
                                                   double margin = 1e-3) const;
  cplx integrate_numeric(const std::vector<cplx>& r, const std::vector<cplx>& h,
                         double margin = 1e-3) const;
  // Throws std::domain_error if h is within margin (relative) of a root wall.
  void check_regular(const std::vector<cplx>& h, double margin) const;

  // Equivariant pairing G_{uv} = int sigma_u sigma_v.
  const std::vector<std::vector<EquivPoly>>& pairing() const;
  // Nonequivariant pairing (integer matrix, a permutation).
  const std::vector<std::vector<Rational>>& pairing0() const;
  int vee(int v) const;  // position of the Poincare dual index v^vee
  // Schubert coefficients of sigma^v (equivariant).
  const std::vector<EquivPoly>& dual_coeffs(int v) const;
  CohClass dual_class(int v) const;

  // Nonequivariant cup product of sigma_u and sigma_v (coefficient vector).
  const std::vector<Rational>& cup0(int u, int v) const;
  // Nonequivariant product of two coefficient vectors.
  template <class T>
  std::vector<T> mul0(const std::vector<T>& a, const std::vector<T>& b) const;

  std::string restriction_csv() const;
  std::string pairing_csv() const;

 private:
  FlagSpace X_;
  std::vector<std::vector<EquivPoly>> restr_;
  std::vector<std::vector<IntVec>> weights_;
  std::vector<EquivPoly> euler_;
  EquivPoly all_roots_;

  mutable std::mutex mu_;
  mutable std::vector<std::vector<EquivPoly>> pairing_;
  mutable std::vector<std::vector<Rational>> pairing0_;
  mutable IntVec vee_;
  mutable std::vector<std::vector<EquivPoly>> dual_;
  mutable std::map<std::pair<int, int>, std::vector<Rational>> cup0_;
  void build_pairing() const;
  void build_dual() const;
};

template <class T>
std::vector<T> Schubert::mul0(const std::vector<T>& a, const std::vector<T>& b) const {
  std::vector<T> out(n(), T(0));
  for (int u = 0; u < n(); ++u) {
    if (a[u] == T(0)) continue;
    for (int v = 0; v < n(); ++v) {
      if (b[v] == T(0) || length(u) + length(v) > X_.P.ell) continue;
      const auto& c = cup0(u, v);
      for (int w = 0; w < n(); ++w)
        if (c[w] != 0) out[w] += a[u] * b[v] * from_rational<T>(c[w]);
    }
  }
  return out;
}

}  // namespace gammaflag::schubert
