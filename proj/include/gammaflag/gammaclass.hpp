#pragma once

#include <functional>
#include <vector>

#include "gammaflag/numerics.hpp"
#include "gammaflag/schubert.hpp"

namespace gammaflag::gammaclass {

using schubert::EquivPoly;
using schubert::Schubert;

// Euler-Mascheroni constant and zeta values, computed once by quadrature.
double euler_gamma();
double zeta(int k);
// Gamma(x) = int_0^oo e^{-t} t^{x-1} dt for x > 0, by quadrature.
double gamma_quadrature(double x);

// log Gamma(1+x) = sum_{k>=1} b_k x^k.
struct LogGammaSeries {
  int K = 0;
  std::vector<double> b;  // b[0] unused
  cplx eval(cplx x) const;
  // |partial sum - log Gamma(1+x)|
  double truncation_error(double x) const;
};
LogGammaSeries log_gamma_coeffs(int K);

// Power sum of the tangent Chern roots as a nonequivariant class.
std::vector<Rational> power_sum_class(const Schubert& S, int k);
// Nonequivariant first Chern class: sum_i <c1, beta_i> sigma_{s_i}.
std::vector<Rational> c1_class(const Schubert& S);

struct GammaClass {
  const Schubert* S = nullptr;
  std::vector<double> coeffs;  // nonequivariant, by position in W^P
  // prod over alpha in -(R+ \ R+_P) of Gamma(1 + (w alpha^vee)(h)).
  cplx restriction(int w, const std::vector<cplx>& h) const;
};
// Throws std::invalid_argument if K < ell (the nilpotent expansion would be
// truncated before degree 2 ell).
GammaClass gamma_class(const Schubert& S, int K = 30);

// h = 0 normalization: exp(log(hbar) c1 cup) then hbar^{ell/2 - l(v)} on sigma_v.
std::vector<cplx> normalize0(const Schubert& S, const std::vector<cplx>& x, double hbar);

using RestrictionFn = std::function<cplx(int w, const std::vector<cplx>& h)>;
// Restriction values of hbar^{-mu} hbar^{c1} x at every fixed point:
// hbar^{ell/2} hbar^{c1|_w(h/hbar)} x|_w(h/hbar).
std::vector<cplx> normalize_restrictions(const Schubert& S, const RestrictionFn& x, double hbar,
                                         const std::vector<cplx>& h);
// Same for an exact equivariant class given by Schubert coefficients,
// returned as numeric Schubert coefficients at h.
std::vector<cplx> normalize_class(const Schubert& S, const std::vector<EquivPoly>& coeffs,
                                  double hbar, const std::vector<cplx>& h);

// c1|_w(h) = sum of tangent weights at w.
cplx c1_restriction(const Schubert& S, int w, const std::vector<cplx>& h);

}  // namespace gammaflag::gammaclass
