#include "snq/uncertainty.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "snq/errors.hpp"
#include "stats_util.hpp"

namespace snq {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_u_levels(std::span<const double> u_level_db, std::size_t n) {
  if (u_level_db.size() != n) {
    throw std::invalid_argument("u_level vector length must equal the path size");
  }
  for (double u : u_level_db) {
    if (!(u >= 0.0) || !std::isfinite(u)) {
      throw std::invalid_argument("level uncertainties must be finite and >= 0");
    }
  }
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

double level_uncertainty(const OctaveSpectrum& spectrum,
                         const OctaveUncertaintyTable& table) {
  // Weights are energy fractions, so the computation is invariant under a
  // common level shift; anchor at the loudest weighted band.
  double max_weighted = kAbsentBand;
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    if (!spectrum.band_present(b)) continue;
    max_weighted = std::max(max_weighted, spectrum.levels_db[b] + kAWeightingDb[b]);
  }
  if (max_weighted == kAbsentBand) return 0.0;

  double denom = 0.0;
  std::array<double, kNumOctaveBands> p{};
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    if (!spectrum.band_present(b)) continue;
    p[b] = std::pow(10.0, (spectrum.levels_db[b] + kAWeightingDb[b] - max_weighted) / 10.0);
    denom += p[b];
  }

  double u2 = 0.0;
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    if (!spectrum.band_present(b)) continue;
    const double w = p[b] / denom;
    u2 += w * w * table.u_oct_db[b] * table.u_oct_db[b];
  }
  return std::sqrt(u2);
}

std::vector<double> level_uncertainties(const MeasurementPath& path,
                                        const OctaveUncertaintyTable& table) {
  std::vector<double> out;
  out.reserve(path.positions.size());
  for (const auto& pos : path.positions) {
    out.push_back(level_uncertainty(pos.spectrum, table));
  }
  return out;
}

std::vector<double> alpha(std::span<const double> level_dba,
                          std::span<const double> distance_m, double d2s_dba) {
  std::vector<double> out;
  out.reserve(level_dba.size());
  for (std::size_t i = 0; i < level_dba.size(); ++i) {
    out.push_back(level_dba[i] + 2.0 * d2s_dba * std::log2(distance_m[i]));
  }
  return out;
}

std::vector<double> alpha(const MeasurementPath& path, double d2s_dba) {
  std::vector<double> levels, dists;
  levels.reserve(path.positions.size());
  dists.reserve(path.positions.size());
  for (const auto& pos : path.positions) {
    levels.push_back(a_weighted_level(pos.spectrum));
    dists.push_back(pos.distance_m);
  }
  return alpha(levels, dists, d2s_dba);
}

SnqJacobian snq_partials(const MeasurementPath& path, double threshold_dba,
                         double zero_decay_eps) {
  SnqJacobian jac;
  jac.fit = fit_path(path, threshold_dba, zero_decay_eps);
  const auto& stats = jac.fit.stats;
  const std::size_t n = stats.n;
  const double dn = static_cast<double>(n);
  const double nvar = dn * stats.var_x;
  const double d2s = jac.fit.snq.d2s_dba;
  const double m = stats.mean_log2_r_over_4;

  std::vector<double> dists;
  dists.reserve(n);
  for (const auto& pos : path.positions) dists.push_back(pos.distance_m);
  const auto a = alpha(jac.fit.level_dba, dists, d2s);
  const double mean_a = detail::mean(a);

  const double rc = jac.fit.snq.rc_m;
  const double c = std::log2(rc / 4.0);
  const double chain = kLn2 * rc / d2s;  // d rc / d (exponent numerator)

  jac.dd2s_dlevel.resize(n);
  jac.dd2s_ddist.resize(n);
  jac.dlpas4m_dlevel.resize(n);
  jac.dlpas4m_ddist.resize(n);
  jac.drc_dlevel.resize(n);
  jac.drc_ddist.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double r = dists[i];
    const double dd_dl = -(stats.log2_r[i] - stats.mean_x) / nvar;
    const double dd_dr = -(a[i] - mean_a) / (kLn2 * r * nvar);
    const double dl4_dl = 1.0 / dn + dd_dl * m;
    const double dl4_dr = d2s / (dn * kLn2 * r) + dd_dr * m;

    jac.dd2s_dlevel[i] = dd_dl;
    jac.dd2s_ddist[i] = dd_dr;
    jac.dlpas4m_dlevel[i] = dl4_dl;
    jac.dlpas4m_ddist[i] = dl4_dr;
    jac.drc_dlevel[i] = chain * (dl4_dl - c * dd_dl);
    jac.drc_ddist[i] = chain * (dl4_dr - c * dd_dr);
  }
  return jac;
}

UncertaintyBudget propagate_jacobian(const MeasurementPath& path,
                                     std::span<const double> u_level_db,
                                     double u_r_m, double threshold_dba) {
  const auto jac = snq_partials(path, threshold_dba);
  const std::size_t n = jac.fit.stats.n;
  check_u_levels(u_level_db, n);
  if (!(u_r_m >= 0.0) || !std::isfinite(u_r_m)) {
    throw std::invalid_argument("u_r must be finite and >= 0");
  }

  UncertaintyBudget b;
  for (std::size_t i = 0; i < n; ++i) {
    const double ul2 = u_level_db[i] * u_level_db[i];
    const double ur2 = u_r_m * u_r_m;
    b.d2s.u2_level += jac.dd2s_dlevel[i] * jac.dd2s_dlevel[i] * ul2;
    b.d2s.u2_dist += jac.dd2s_ddist[i] * jac.dd2s_ddist[i] * ur2;
    b.lpas4m.u2_level += jac.dlpas4m_dlevel[i] * jac.dlpas4m_dlevel[i] * ul2;
    b.lpas4m.u2_dist += jac.dlpas4m_ddist[i] * jac.dlpas4m_ddist[i] * ur2;
    b.rc.u2_level += jac.drc_dlevel[i] * jac.drc_dlevel[i] * ul2;
    b.rc.u2_dist += jac.drc_ddist[i] * jac.drc_ddist[i] * ur2;
  }
  return b;
}

AnalyticBudget analytic_budget(const MeasurementPath& path,
                               std::span<const double> u_level_db, double u_r_m,
                               double threshold_dba) {
  const auto jac = snq_partials(path, threshold_dba);
  const auto& stats = jac.fit.stats;
  const std::size_t n = stats.n;
  check_u_levels(u_level_db, n);
  if (!(u_r_m >= 0.0) || !std::isfinite(u_r_m)) {
    throw std::invalid_argument("u_r must be finite and >= 0");
  }

  const double dn = static_cast<double>(n);
  const double var = stats.var_x;
  const double m = stats.mean_log2_r_over_4;
  const double d2s = jac.fit.snq.d2s_dba;
  const double rc = jac.fit.snq.rc_m;
  const double c = std::log2(rc / 4.0);
  const double chain2 = (kLn2 * rc / d2s) * (kLn2 * rc / d2s);
  const double ur2 = u_r_m * u_r_m;

  std::vector<double> dists, ul2(n), inv_r2(n);
  dists.reserve(n);
  for (const auto& pos : path.positions) dists.push_back(pos.distance_m);
  for (std::size_t i = 0; i < n; ++i) {
    ul2[i] = u_level_db[i] * u_level_db[i];
    inv_r2[i] = 1.0 / (dists[i] * dists[i]);
  }
  const auto a = alpha(jac.fit.level_dba, dists, d2s);
  const double mean_a = detail::mean(a);

  // covariance quantities of the closed-form expressions
  std::vector<double> x_centered_ul2(n), a_centered_over_r2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_centered_ul2[i] = (stats.log2_r[i] - stats.mean_x) * ul2[i];
    a_centered_over_r2[i] = (a[i] - mean_a) * inv_r2[i];
  }

  AnalyticBudget out;
  out.u_r_m = u_r_m;
  auto& t = out.terms;
  t.cov_x_centered_ul2 = detail::covariance(stats.log2_r, x_centered_ul2);
  t.cov_alpha_centered_over_r2 = detail::covariance(a, a_centered_over_r2);
  t.cov_alpha_inv_r2 = detail::covariance(a, inv_r2);
  t.cov_x_ul2 = detail::covariance(stats.log2_r, ul2);

  // --- covariance form ----------------------------------------------------
  UncertaintyBudget cov;
  cov.d2s.u2_level = t.cov_x_centered_ul2 / (dn * var * var);
  cov.d2s.u2_dist = (ur2 / (kLn2 * kLn2)) * t.cov_alpha_centered_over_r2 / (dn * var * var);

  const double mean_ul2 = detail::mean(ul2);
  cov.lpas4m.u2_level = mean_ul2 / dn + m * m * cov.d2s.u2_level -
                        (2.0 * m / dn) * t.cov_x_ul2 / var;
  cov.lpas4m.u2_dist = (d2s * d2s * ur2 / (dn * kLn2 * kLn2)) * stats.mean_inv_r2 +
                       m * m * cov.d2s.u2_dist -
                       (2.0 * d2s * ur2 / (dn * kLn2 * kLn2)) * m * t.cov_alpha_inv_r2 / var;

  cov.rc.u2_level = chain2 * (cov.lpas4m.u2_level + (c * c - 2.0 * c * m) * cov.d2s.u2_level +
                              (2.0 * c / dn) * t.cov_x_ul2 / var);
  cov.rc.u2_dist = chain2 * (cov.lpas4m.u2_dist + (c * c - 2.0 * c * m) * cov.d2s.u2_dist +
                             (2.0 * c * d2s * ur2 / (dn * kLn2 * kLn2)) * t.cov_alpha_inv_r2 / var);

  // --- raw summation form over the per-position partials -------------------
  UncertaintyBudget sum;
  double sum_dd_l2 = 0.0, sum_dd_r2 = 0.0, sum_ul2 = 0.0, sum_inv_r2 = 0.0;
  double t3 = 0.0, t4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum_dd_l2 += jac.dd2s_dlevel[i] * jac.dd2s_dlevel[i] * ul2[i];
    sum_dd_r2 += jac.dd2s_ddist[i] * jac.dd2s_ddist[i];
    sum_ul2 += ul2[i];
    sum_inv_r2 += inv_r2[i];
    t3 += jac.dd2s_dlevel[i] * ul2[i];
    t4 += jac.dd2s_ddist[i] / dists[i];
  }
  sum.d2s.u2_level = sum_dd_l2;
  sum.d2s.u2_dist = ur2 * sum_dd_r2;

  sum.lpas4m.u2_level = sum_ul2 / (dn * dn) + m * m * sum.d2s.u2_level + (2.0 * m / dn) * t3;
  const double first_r = (d2s * u_r_m / (dn * kLn2)) * (d2s * u_r_m / (dn * kLn2)) * sum_inv_r2;
  sum.lpas4m.u2_dist = first_r + m * m * sum.d2s.u2_dist + (2.0 * d2s * ur2 / (dn * kLn2)) * m * t4;

  const double t5 = t3 / dn + m * sum.d2s.u2_level;
  const double t6 = (d2s * ur2 / (dn * kLn2)) * t4 + m * sum.d2s.u2_dist;
  sum.rc.u2_level = chain2 * (sum.lpas4m.u2_level + c * c * sum.d2s.u2_level - 2.0 * c * t5);
  sum.rc.u2_dist = chain2 * (sum.lpas4m.u2_dist + c * c * sum.d2s.u2_dist - 2.0 * c * t6);

  t.t3 = t3;
  t.t4 = t4;
  t.t5 = t5;
  t.t6 = t6;

  out.budget = cov;
  out.summation_form = sum;
  out.form_mismatch = std::max(
      {rel_diff(cov.d2s.u2_level, sum.d2s.u2_level),
       rel_diff(cov.d2s.u2_dist, sum.d2s.u2_dist),
       rel_diff(cov.lpas4m.u2_level, sum.lpas4m.u2_level),
       rel_diff(cov.lpas4m.u2_dist, sum.lpas4m.u2_dist),
       rel_diff(cov.rc.u2_level, sum.rc.u2_level),
       rel_diff(cov.rc.u2_dist, sum.rc.u2_dist)});
  return out;
}

AnalyticBudget analytic_budget(const MeasurementPath& path,
                               const OctaveUncertaintyTable& table,
                               const DistanceErrorModel& dist_model,
                               double threshold_dba) {
  const auto u_levels = level_uncertainties(path, table);
  return analytic_budget(path, u_levels, dist_model.u_r_total_m(), threshold_dba);
}

}  // namespace snq
