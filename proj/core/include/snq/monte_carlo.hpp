#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "snq/error_model.hpp"
#include "snq/field.hpp"
#include "snq/metrics.hpp"
#include "snq/rng.hpp"

namespace snq {

/// Error model for the measurement emulation.
///
/// Band errors are uniform in [-u_oct*sqrt(3), +u_oct*sqrt(3)] so their
/// standard deviation equals u_oct; the tape error is Normal(0, u_tape^2);
/// device positioning offsets are Normal(0, sigma^2) per horizontal axis.
struct McErrorModel {
  OctaveUncertaintyTable octave_table;
  DistanceErrorModel dist_model;
  double positioning_sigma_m;
  /// When true the field is queried at the displaced positions, so the level
  /// picks up whatever spatial variation the field carries; when false only
  /// the distances shift and levels stay nominal (the assumption behind the
  /// closed-form budget).
  bool couple_levels_to_position = false;

  McErrorModel() : positioning_sigma_m(dist_model.positioning_sigma_m()) {}

  /// Same model with every error magnitude multiplied by `factor`.
  McErrorModel scaled(double factor) const;
};

struct McConfig {
  std::uint64_t seed = 1;
  std::size_t batch_size = 10000;
  std::size_t max_batches = 100;
  /// Convergence is not declared before this many runs (0 = one batch).
  std::size_t min_runs = 0;
  double tol_level_db = 0.01;  ///< convergence tolerance for D2S and LpAS4m
  double tol_rc_m = 0.01;      ///< convergence tolerance for rc
  double coverage_k = 2.0;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  bool keep_samples = false;
  std::size_t histogram_bins = 41;
};

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;

  double bin_width() const {
    return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size());
  }
};

/// Moment-based normality screen: |skewness| < 0.5 and |excess kurtosis| < 1.
struct NormalityCheck {
  bool normal = false;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  bool degenerate = false;  ///< variance ~ 0, flag forced false
};

inline constexpr double kSkewnessLimit = 0.5;
inline constexpr double kExcessKurtosisLimit = 1.0;

/// Throws InsufficientSamplesError below 1000 samples.
NormalityCheck check_normality(std::span<const double> samples);

struct McScalarResult {
  double mean = 0.0;
  double stddev = 0.0;  ///< population convention; this is the MC uncertainty
  Histogram histogram;
  NormalityCheck normality;
};

struct McResult {
  McScalarResult d2s;
  McScalarResult lpas4m;
  McScalarResult rc;
  std::size_t runs_used = 0;
  std::size_t dropped_runs = 0;  ///< non-finite emulations excluded from stats
  bool converged = false;
  std::size_t converged_at_runs = 0;  ///< runs at which estimates had stabilized
  double coverage_k = 2.0;
  // populated when McConfig::keep_samples is set
  std::vector<double> samples_d2s;
  std::vector<double> samples_lpas4m;
  std::vector<double> samples_rc;
};

/// Independent planar offsets, one per device, Normal(0, sigma^2) per axis.
std::vector<Offset2> sample_position_offsets(StreamRng& rng, const McErrorModel& model,
                                             std::size_t n_devices);

/// One synthetic measurement of a whole path:
///   1. draw the source offset and one receiver offset per position, compute
///      the displaced source-receiver distances;
///   2. query the field (displaced or nominal per the coupling flag), add
///      uniform band errors and the normal tape error to each distance;
///   3. fit the perturbed data.
/// Draw order per run: offsets for source then every receiver, then per
/// position seven band errors followed by the tape error.
SnqSet emulate_measurement(const FieldProvider& field, const MeasurementPath& path,
                           const McErrorModel& model, StreamRng& rng,
                           double threshold_dba = kDefaultThresholdDba);

/// Batched Monte-Carlo evaluation. Runs execute on per-run substreams keyed
/// by (seed, run index): results are bit-identical for any thread count.
/// Convergence: successive batch-cumulative standard deviations of all three
/// SNQs move less than the tolerances. A result that hit max_batches without
/// converging is still returned, flagged.
McResult run_mc(const FieldProvider& field, const MeasurementPath& path,
                const McErrorModel& model, const McConfig& config,
                double threshold_dba = kDefaultThresholdDba);

}  // namespace snq
