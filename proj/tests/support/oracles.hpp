#pragma once

// Test-side oracles, independent of the closed-form implementation:
// brute-force uncertainty propagation through a numerically differentiated
// fit, plus deterministic random-path generators.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "snq/metrics.hpp"
#include "snq/path.hpp"

namespace snq::test {

inline MeasurementPath single_band_path(const std::vector<double>& distances,
                                        const std::vector<double>& levels,
                                        std::size_t band = 3) {
  MeasurementPath path;
  path.id = "test";
  for (std::size_t i = 0; i < distances.size(); ++i) {
    path.positions.push_back(
        {distances[i], OctaveSpectrum::single_band(band, levels[i]),
         std::to_string(i + 1)});
  }
  return path;
}

struct FdBudget {
  double u_d2s = 0.0;
  double u_lpas4m = 0.0;
  double u_rc = 0.0;
};

// Central finite differences of the fit with respect to every A-weighted
// level (a common shift of all bands shifts the aggregate exactly) and every
// distance, combined in quadrature.
inline FdBudget fd_propagate(const MeasurementPath& path,
                             std::span<const double> u_level_db, double u_r_m,
                             double threshold_dba = kDefaultThresholdDba,
                             double rel_step = 1e-5) {
  const std::size_t n = path.positions.size();
  FdBudget out;
  double v_d2s = 0.0, v_l4 = 0.0, v_rc = 0.0;

  auto central = [&](auto&& perturb, double h, double u) {
    MeasurementPath hi = path, lo = path;
    perturb(hi, +h);
    perturb(lo, -h);
    const SnqSet above = compute_snq(hi, threshold_dba);
    const SnqSet below = compute_snq(lo, threshold_dba);
    const double gd = (above.d2s_dba - below.d2s_dba) / (2.0 * h);
    const double gl = (above.lpas4m_dba - below.lpas4m_dba) / (2.0 * h);
    const double gr = (above.rc_m - below.rc_m) / (2.0 * h);
    v_d2s += gd * gd * u * u;
    v_l4 += gl * gl * u * u;
    v_rc += gr * gr * u * u;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double level = a_weighted_level(path.positions[i].spectrum);
    central(
        [i](MeasurementPath& p, double h) {
          p.positions[i].spectrum = p.positions[i].spectrum.shifted(h);
        },
        rel_step * std::max(1.0, std::abs(level)), u_level_db[i]);
    central(
        [i](MeasurementPath& p, double h) { p.positions[i].distance_m += h; },
        rel_step * path.positions[i].distance_m, u_r_m);
  }
  out.u_d2s = std::sqrt(v_d2s);
  out.u_lpas4m = std::sqrt(v_l4);
  out.u_rc = std::sqrt(v_rc);
  return out;
}

// Random path with a clear decay, bounded residual noise and well-spread
// abscissae; distances in [1, 32] m, N in [3, 12].
inline MeasurementPath random_path(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> n_dist(3, 12);
  std::uniform_real_distribution<double> x_dist(0.0, 5.0);
  std::uniform_real_distribution<double> d_dist(3.0, 8.0);
  std::uniform_real_distribution<double> a_dist(42.0, 58.0);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);

  for (;;) {
    const std::size_t n = n_dist(rng);
    std::vector<double> x(n);
    for (auto& v : x) v = x_dist(rng);
    std::sort(x.begin(), x.end());

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var < 0.15) continue;

    const double d2s = d_dist(rng);
    const double level_4m = a_dist(rng);
    std::vector<double> r(n), levels(n);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = std::exp2(x[i]);
      levels[i] = level_4m - d2s * (x[i] - 2.0) + noise(rng);
    }
    MeasurementPath path = single_band_path(r, levels);
    const SnqSet snq = compute_snq(path);
    if (std::abs(snq.d2s_dba) < 1.0) continue;
    return path;
  }
}

inline std::vector<double> random_u_levels(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u_dist(0.2, 1.5);
  std::vector<double> out(n);
  for (auto& v : out) v = u_dist(rng);
  return out;
}

}  // namespace snq::test
