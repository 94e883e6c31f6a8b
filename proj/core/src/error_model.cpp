#include "snq/error_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace snq {

double inverse_erf(double p) {
  if (!(p > -1.0 && p < 1.0)) {
    throw std::domain_error("inverse_erf requires |p| < 1");
  }
  if (p == 0.0) return 0.0;

  // Winitzki-style initial guess, then Newton on erf(x) - p.
  const double a = 0.147;
  const double ln1mp2 = std::log(1.0 - p * p);
  const double term = 2.0 / (std::numbers::pi * a) + ln1mp2 / 2.0;
  double x = std::copysign(std::sqrt(std::sqrt(term * term - ln1mp2 / a) - term), p);

  const double half_sqrt_pi = std::sqrt(std::numbers::pi) / 2.0;
  for (int i = 0; i < 6; ++i) {
    const double err = std::erf(x) - p;
    x -= err * half_sqrt_pi * std::exp(x * x);
  }
  return x;
}

double DistanceErrorModel::positioning_sigma_m() const {
  // P(|X| <= side/2)^2 = coverage with X ~ Normal(0, sigma^2) per axis:
  // erf(half_side / (sigma sqrt(2))) = sqrt(coverage)
  const double half_side = square_side_m / 2.0;
  const double per_axis = std::sqrt(square_coverage);
  return half_side / (std::numbers::sqrt2 * inverse_erf(per_axis));
}

double DistanceErrorModel::u_pos_m() const {
  return std::numbers::sqrt2 * positioning_sigma_m();
}

double DistanceErrorModel::u_r_total_m() const {
  const double up = u_pos_m();
  return std::sqrt(u_tape_m * u_tape_m + up * up);
}

}  // namespace snq
