#include "oracles.hpp"

#include <cmath>
#include <random>

namespace oracle {

namespace {

double surrogate(int setting, int g, const Covariates& x, double z) {
  const double shift = setting == 1 ? 1.5 : 1.0;
  const double sd = std::sqrt(0.4 + 1.4 * g);
  return shift * g + 0.2 * x[0] + 0.2 * x[1] + 0.3 * x[2] + 0.1 * x[3] + 0.4 * x[4] + 0.3 * x[5] + sd * z;
}

double outcome(int setting, int g, double s, const Covariates& x, double e) {
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4], x6 = x[5];
  double base = g + 2.0 * s + e;
  if (setting == 1 || setting == 4) {
    base += 0.2 * x1 + 0.5 * x2 + 0.2 * x3 + 0.1 * x4 + 0.3 * x5 + 0.4 * x6;
    if (setting == 1) base += 2.0 * g * x1;
  } else if (setting == 2) {
    base += std::sin(x1) + std::cos(x2) + x3 * x3 + x4 + std::log(x5 + 1.0) + std::sqrt(x6) + 1.5 * g * x1 * x1;
  } else {
    base += 0.5 * x1 * x5 * x5 + std::log(x2 / x3) + 2.0 * std::sin(x4 + x6) + 1.5 * g * x1 * x1;
  }
  return base;
}

}  // namespace

Effects monte_carlo_effects(int setting, const Covariates& x, int draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  double total = 0.0;
  double residual = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double z0 = z(rng), z1 = z(rng), e0 = z(rng), e1 = z(rng);
    const double s0 = surrogate(setting, 0, x, z0);
    const double s1 = surrogate(setting, 1, x, z1);
    const double y0 = outcome(setting, 0, s0, x, e0);
    total += outcome(setting, 1, s1, x, e1) - y0;
    residual += outcome(setting, 1, s0, x, e1) - y0;
  }
  Effects out;
  out.delta = total / draws;
  out.delta_s = residual / draws;
  out.r_s = 1.0 - out.delta_s / out.delta;
  return out;
}

Covariates draw_covariates(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Covariates x;
  x[0] = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
  x[1] = std::gamma_distribution<double>(2.0, 2.0)(rng);
  x[2] = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
  x[3] = std::gamma_distribution<double>(3.0, 1.0)(rng);
  x[4] = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
  x[5] = std::gamma_distribution<double>(1.0, 1.0)(rng);
  return x;
}

}  // namespace oracle
