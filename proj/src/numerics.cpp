#include "gammaflag/numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numbers>
#include <thread>

namespace gammaflag {

namespace {
const double kLanczos[9] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                            771.32342877765313,   -176.61502916214059,   12.507343278686905,
                            -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
}

cplx lgamma_c(cplx z) {
  const double pi = std::numbers::pi;
  if (z.real() < 0.5) {
    // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
    return std::log(pi / std::sin(pi * z)) - lgamma_c(1.0 - z);
  }
  // shift up for accuracy on large imaginary parts is not needed at desk scale
  z -= 1.0;
  cplx x = kLanczos[0];
  for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + double(i));
  cplx t = z + 7.5;
  return 0.5 * std::log(2 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

cplx gamma_c(cplx z) {
  if (z.imag() == 0.0 && z.real() > 0) return std::tgamma(z.real());
  return std::exp(lgamma_c(z));
}

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) {
        r.weights[i] = 2 / ((1 - x * x) * dp * dp);
        break;
      }
      r.weights[i] = 2 / ((1 - x * x) * dp * dp);
    }
    r.nodes[i] = x;
  }
  return cache.emplace(n, std::move(r)).first->second;
}

int thread_cap() {
  int hw = (int)std::thread::hardware_concurrency();
  if (hw <= 0) hw = 1;
  if (const char* s = std::getenv("GAMMAFLAG_THREADS")) {
    int v = std::atoi(s);
    if (v > 0) return std::min(v, std::max(hw, v));
  }
  return hw;
}

void parallel_for(int n, const std::function<void(int)>& body) {
  int nt = std::min(thread_cap(), n);
  if (nt <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += nt) body(i);
    });
  for (auto& th : pool) th.join();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  int n = (int)x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  double den = n * sxx - sx * sx;
  f.slope = den != 0 ? (n * sxy - sx * sy) / den : 0;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    double r = y[i] - f.intercept - f.slope * x[i];
    ss += r * r;
  }
  f.rms = std::sqrt(ss / std::max(n, 1));
  return f;
}

}  // namespace gammaflag
