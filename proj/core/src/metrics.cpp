#include "snq/metrics.hpp"

#include <cmath>
#include <numbers>

#include "snq/errors.hpp"
#include "stats_util.hpp"

namespace snq {

double comfort_distance(double d2s_dba, double lpas4m_dba, double threshold_dba) {
  return 4.0 * std::exp2((lpas4m_dba - threshold_dba) / d2s_dba);
}

RegressionStats regression_stats(const MeasurementPath& path) {
  const std::size_t n = path.positions.size();
  if (n < 2) {
    throw DegenerateGeometryError("regression statistics need at least 2 positions");
  }

  RegressionStats s;
  s.n = n;
  s.log2_r.reserve(n);
  double sum_x = 0.0, sum_inv_r2 = 0.0;
  for (const auto& pos : path.positions) {
    if (!(pos.distance_m > 0.0) || !std::isfinite(pos.distance_m)) {
      throw DegenerateGeometryError("non-positive distance in path");
    }
    const double x = std::log2(pos.distance_m);
    s.log2_r.push_back(x);
    sum_x += x;
    sum_inv_r2 += 1.0 / (pos.distance_m * pos.distance_m);
  }
  const double dn = static_cast<double>(n);
  s.mean_x = sum_x / dn;
  s.mean_inv_r2 = sum_inv_r2 / dn;
  s.mean_log2_r_over_4 = s.mean_x - 2.0;  // log2 4 = 2

  double sum_dev2 = 0.0, sum_sq_over_4 = 0.0;
  for (double x : s.log2_r) {
    const double d = x - s.mean_x;
    sum_dev2 += d * d;
    const double x4 = x - 2.0;
    sum_sq_over_4 += x4 * x4;
  }
  s.var_x = sum_dev2 / dn;
  s.mean_sq_log2_r_over_4 = sum_sq_over_4 / dn;

  if (!(s.var_x > 0.0)) {
    throw DegenerateGeometryError("all distances equal; Var(log2 r) = 0");
  }
  return s;
}

SnqFit fit_path(const MeasurementPath& path, double threshold_dba,
                double zero_decay_eps) {
  const std::size_t n = path.positions.size();
  if (n < 3) {
    throw DegenerateGeometryError("at least 3 positions required, got " +
                                  std::to_string(n));
  }

  SnqFit fit;
  fit.stats = regression_stats(path);
  fit.level_dba.reserve(n);
  for (const auto& pos : path.positions) {
    fit.level_dba.push_back(a_weighted_level(pos.spectrum));
  }

  const double mean_level = detail::mean(fit.level_dba);
  const double slope = detail::covariance(fit.stats.log2_r, fit.level_dba,
                                          fit.stats.mean_x, mean_level) /
                       fit.stats.var_x;

  fit.snq.d2s_dba = -slope;
  fit.snq.lpas4m_dba = mean_level + fit.snq.d2s_dba * fit.stats.mean_log2_r_over_4;
  fit.snq.threshold_dba = threshold_dba;

  if (!(std::abs(fit.snq.d2s_dba) > zero_decay_eps)) {
    throw ZeroDecayError("|D2S| below epsilon; comfort distance undefined");
  }
  fit.snq.rc_m = comfort_distance(fit.snq.d2s_dba, fit.snq.lpas4m_dba, threshold_dba);

  fit.residual_db.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double fitted =
        mean_level + slope * (fit.stats.log2_r[i] - fit.stats.mean_x);
    fit.residual_db.push_back(fit.level_dba[i] - fitted);
  }
  return fit;
}

SnqSet compute_snq(const MeasurementPath& path, double threshold_dba,
                   double zero_decay_eps) {
  return fit_path(path, threshold_dba, zero_decay_eps).snq;
}

}  // namespace snq
