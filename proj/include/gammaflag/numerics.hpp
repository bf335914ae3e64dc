#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace gammaflag {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

// log Gamma(z) for complex z (principal branch continued from the positive
// real axis), Lanczos g=7 n=9 with reflection for Re z < 1/2.
cplx lgamma_c(cplx z);
cplx gamma_c(cplx z);

struct GaussRule {
  std::vector<double> nodes, weights;  // on [-1, 1]
};
const GaussRule& gauss_legendre(int n);

// Number of worker threads; honours GAMMAFLAG_THREADS.
int thread_cap();
// Runs body(i) for i in [0, n) over up to thread_cap() threads. Results must
// be written to per-index slots so that reductions stay deterministic.
void parallel_for(int n, const std::function<void(int)>& body);

// Least-squares line fit y = a + b x; returns (a, b, rms residual).
struct LineFit {
  double intercept = 0, slope = 0, rms = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gammaflag
