#pragma once

#include <cstddef>
#include <vector>

#include "snq/path.hpp"

namespace snq {

/// Comfort threshold below which speech is considered non-disturbing.
inline constexpr double kDefaultThresholdDba = 45.0;

/// |D2S| below this value makes the comfort distance ill-defined.
inline constexpr double kDefaultZeroDecayEps = 1e-6;

/// The three spatial-decay single number quantities.
///
/// D2S is the drop of the A-weighted speech level per doubling of the
/// distance to the source (negated slope of the level vs log2(r) fit),
/// LpAS4m the fitted level at 4 m, and rc the distance where the fitted
/// level crosses the comfort threshold:
///   rc = 4 * 2^((LpAS4m - threshold) / D2S)
struct SnqSet {
  double d2s_dba = 0.0;
  double lpas4m_dba = 0.0;
  double rc_m = 0.0;
  double threshold_dba = kDefaultThresholdDba;
};

/// Moments of the regression abscissae x_i = log2(r_i), all with the
/// population (divide-by-N) convention.
struct RegressionStats {
  std::vector<double> log2_r;
  double mean_x = 0.0;
  double var_x = 0.0;                  ///< population variance, > 0
  double mean_log2_r_over_4 = 0.0;     ///< mean_x - 2
  double mean_sq_log2_r_over_4 = 0.0;  ///< mean of log2(r/4)^2
  double mean_inv_r2 = 0.0;            ///< mean of 1/r^2
  std::size_t n = 0;
};

/// Full fit result: SNQs plus per-position diagnostics.
struct SnqFit {
  SnqSet snq;
  std::vector<double> level_dba;    ///< A-weighted level per position
  std::vector<double> residual_db;  ///< level minus fitted line
  RegressionStats stats;
};

/// Distance where the fitted decay line crosses the threshold; |d2s| > 0.
double comfort_distance(double d2s_dba, double lpas4m_dba,
                        double threshold_dba = kDefaultThresholdDba);

/// Throws DegenerateGeometryError for N < 2 or zero abscissa variance.
RegressionStats regression_stats(const MeasurementPath& path);

/// Least-squares fit of the A-weighted levels against log2(r).
///
/// Throws DegenerateGeometryError (N < 3, equal distances) and
/// ZeroDecayError (|D2S| < zero_decay_eps, rc undefined).
SnqFit fit_path(const MeasurementPath& path,
                double threshold_dba = kDefaultThresholdDba,
                double zero_decay_eps = kDefaultZeroDecayEps);

SnqSet compute_snq(const MeasurementPath& path,
                   double threshold_dba = kDefaultThresholdDba,
                   double zero_decay_eps = kDefaultZeroDecayEps);

}  // namespace snq
