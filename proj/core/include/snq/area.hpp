#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snq/metrics.hpp"
#include "snq/monte_carlo.hpp"
#include "snq/uncertainty.hpp"

namespace snq {

struct Interval {
  double center = 0.0;
  double half_width = 0.0;

  double lo() const { return center - half_width; }
  double hi() const { return center + half_width; }
};

/// True iff the intervals intersect; touching endpoints count as overlap.
bool overlap_test(const Interval& a, const Interval& b);

enum class UncertaintySource { kAnalytic, kMonteCarlo };

/// One measurement path of an acoustic area, with its SNQs, standard
/// uncertainties and the coverage factor used for "95 %" intervals.
struct PathResult {
  std::string path_id;
  SnqSet snq;
  double u_d2s_dba = 0.0;
  double u_lpas4m_dba = 0.0;
  double u_rc_m = 0.0;
  UncertaintySource source = UncertaintySource::kAnalytic;
  double coverage_k = 2.0;
  // raw MC samples, required only for PoolMode::kPooledSamples
  std::vector<double> samples_d2s;
  std::vector<double> samples_lpas4m;
  std::vector<double> samples_rc;

  Interval d2s_interval() const { return {snq.d2s_dba, coverage_k * u_d2s_dba}; }
  Interval lpas4m_interval() const { return {snq.lpas4m_dba, coverage_k * u_lpas4m_dba}; }
  Interval rc_interval() const { return {snq.rc_m, coverage_k * u_rc_m}; }

  static PathResult from_analytic(const std::string& id, const SnqSet& snq,
                                  const UncertaintyBudget& budget, double coverage_k = 2.0);
  static PathResult from_mc(const std::string& id, const SnqSet& snq,
                            const McResult& mc);
};

/// How the office-wide uncertainty is assembled from the per-path results:
/// law of total variance over the per-path summaries, or the spread of the
/// raw MC samples pooled across paths (identical for equal sample counts).
enum class PoolMode { kTotalVariance, kPooledSamples };

struct PooledSnq {
  double pooled_mean = 0.0;
  double between_var = 0.0;      ///< population variance of the path means
  double mean_within_var = 0.0;  ///< mean of the per-path u^2
  double pooled_u = 0.0;
  bool unique_value_ok = true;   ///< false iff any pair of 95 % intervals is disjoint
  std::vector<std::vector<bool>> overlap;  ///< pairwise matrix, diagonal true
};

struct AreaResult {
  std::vector<PathResult> paths;
  PooledSnq d2s;
  PooledSnq lpas4m;
  PooledSnq rc;
  PoolMode mode = PoolMode::kTotalVariance;
  double coverage_k = 2.0;
  bool two_path_warning = false;  ///< between-path variance from only 2 paths
};

/// Throws InsufficientPathsError below 2 paths; PoolMode::kPooledSamples
/// additionally requires samples on every path.
AreaResult pool_area(std::vector<PathResult> paths,
                     PoolMode mode = PoolMode::kTotalVariance);

struct UnicityVerdict {
  std::string snq_name;
  bool unique_value_ok = true;
  double pooled_value = 0.0;
  double pooled_u = 0.0;
  double expanded_u = 0.0;  ///< coverage_k * pooled_u
  std::vector<std::pair<std::size_t, std::size_t>> disjoint_pairs;
};

struct UnicityReport {
  std::vector<UnicityVerdict> verdicts;  // d2s, lpas4m, rc
  double coverage_k = 2.0;
  bool two_path_warning = false;

  std::string to_text() const;
};

UnicityReport unicity_report(const AreaResult& area);

}  // namespace snq
