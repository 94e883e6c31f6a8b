#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "snq/error_model.hpp"
#include "snq/metrics.hpp"
#include "snq/path.hpp"

namespace snq {

/// Standard uncertainty of the A-weighted level obtained from the band
/// uncertainties by first-order propagation through the energetic sum:
///   u^2 = sum( (10^((L_oct+A_oct)/10) / 10^(LpAS/10)) * u_oct )^2
/// Absent bands carry zero weight. The result is invariant under a common
/// shift of all band levels.
double level_uncertainty(const OctaveSpectrum& spectrum,
                         const OctaveUncertaintyTable& table);

/// Per-position level uncertainties, each from that position's own spectrum.
std::vector<double> level_uncertainties(const MeasurementPath& path,
                                        const OctaveUncertaintyTable& table);

/// alpha_i = LpAS_i + 2 * D2S * log2(r_i); the quantity through which the
/// distance sensitivities of the fit are expressed.
std::vector<double> alpha(const MeasurementPath& path, double d2s_dba);
std::vector<double> alpha(std::span<const double> level_dba,
                          std::span<const double> distance_m, double d2s_dba);

/// Closed-form partial derivatives of (D2S, LpAS4m, rc) with respect to every
/// level and every distance, evaluated at the fitted point:
///   dD2S/dL_i    = -(x_i - mean_x) / (N Var(x))
///   dD2S/dr_i    = -(alpha_i - mean_alpha) / (ln2 r_i N Var(x))
///   dL4/dL_i     = 1/N + dD2S/dL_i * mean(log2(r/4))
///   dL4/dr_i     = D2S/(N ln2 r_i) + dD2S/dr_i * mean(log2(r/4))
///   drc/d.       = (ln2 rc / D2S) * (dL4/d. - log2(rc/4) * dD2S/d.)
struct SnqJacobian {
  SnqFit fit;
  std::vector<double> dd2s_dlevel, dd2s_ddist;
  std::vector<double> dlpas4m_dlevel, dlpas4m_ddist;
  std::vector<double> drc_dlevel, drc_ddist;
};

SnqJacobian snq_partials(const MeasurementPath& path,
                         double threshold_dba = kDefaultThresholdDba,
                         double zero_decay_eps = kDefaultZeroDecayEps);

/// Level-driven / distance-driven variance split of one SNQ uncertainty.
struct UncertaintySplit {
  double u2_level = 0.0;
  double u2_dist = 0.0;

  double u2() const { return u2_level + u2_dist; }
  double u() const { return std::sqrt(u2()); }
};

struct UncertaintyBudget {
  UncertaintySplit d2s;
  UncertaintySplit lpas4m;
  UncertaintySplit rc;

  double u_d2s_dba() const { return d2s.u(); }
  double u_lpas4m_dba() const { return lpas4m.u(); }
  double u_rc_m() const { return rc.u(); }
};

/// Reference propagation: independent-error quadrature over the full
/// Jacobian, u^2 = sum (dSNQ/dL_i u_L_i)^2 + sum (dSNQ/dr_i u_r)^2.
UncertaintyBudget propagate_jacobian(const MeasurementPath& path,
                                     std::span<const double> u_level_db,
                                     double u_r_m,
                                     double threshold_dba = kDefaultThresholdDba);

/// Intermediate quantities of the closed-form budget, exposed so the relative
/// size of every contribution can be examined.
struct BudgetTerms {
  double cov_x_centered_ul2 = 0.0;        ///< Cov(log2 r, (log2 r - mean) u_L^2)
  double cov_alpha_centered_over_r2 = 0.0;///< Cov(alpha, (alpha - mean)/r^2)
  double cov_alpha_inv_r2 = 0.0;          ///< Cov(alpha, 1/r^2)
  double cov_x_ul2 = 0.0;                 ///< Cov(log2 r, u_L^2)
  double t3 = 0.0;  ///< sum dD2S/dL_i u_L_i^2          = -Cov(x,u^2)/Var(x)
  double t4 = 0.0;  ///< sum dD2S/dr_i / r_i            = -Cov(a,1/r^2)/(ln2 Var(x))
  double t5 = 0.0;  ///< sum dL4/dL_i dD2S/dL_i u_L_i^2
  double t6 = 0.0;  ///< sum dL4/dr_i dD2S/dr_i u_r^2
};

/// Closed-form budget evaluated through two algebraically identical routes.
///
/// `budget` uses the covariance expressions, `summation_form` the raw sums
/// over the per-position partial derivatives; `form_mismatch` is the largest
/// relative difference observed between the two (an internal consistency
/// indicator, at rounding level for valid inputs).
struct AnalyticBudget {
  UncertaintyBudget budget;
  UncertaintyBudget summation_form;
  BudgetTerms terms;
  double u_r_m = 0.0;
  double form_mismatch = 0.0;
};

AnalyticBudget analytic_budget(const MeasurementPath& path,
                               std::span<const double> u_level_db,
                               double u_r_m,
                               double threshold_dba = kDefaultThresholdDba);

/// Convenience overload: per-position u_L from the octave table, u_r from the
/// combined distance model.
AnalyticBudget analytic_budget(const MeasurementPath& path,
                               const OctaveUncertaintyTable& table,
                               const DistanceErrorModel& dist_model,
                               double threshold_dba = kDefaultThresholdDba);

}  // namespace snq
