#include "snq/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "snq/errors.hpp"
#include "snq/metrics.hpp"
#include "stats_util.hpp"

namespace snq {

namespace {

void check_offset_finite(const Offset2& off) {
  if (!std::isfinite(off.dx_m) || !std::isfinite(off.dy_m)) {
    throw FieldDomainError("non-finite device offset");
  }
}

// Displaced source-receiver distance for a receiver nominally at distance r
// along the measurement line.
double displaced_distance(double r, const Offset2& source, const Offset2& receiver) {
  const double along = r + receiver.dx_m - source.dx_m;
  const double across = receiver.dy_m - source.dy_m;
  return std::hypot(along, across);
}

// Relative band levels of the synthetic office spectrum (unweighted dB,
// mid-band dominated as measured speech spectra in furnished offices are).
constexpr std::array<double, kNumOctaveBands> kOfficeSpectrumShapeDb = {
    -10.0, -6.5, 0.0, -10.0, -15.5, -20.0, -25.0};

// Per-band decay tilt per unit rate_spread: high bands decay faster.
constexpr std::array<double, kNumOctaveBands> kRateTilt = {
    -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};

}  // namespace

OctaveSpectrum FieldProvider::spectrum_at(std::size_t position,
                                          const Offset2& source_offset,
                                          const Offset2& receiver_offset) const {
  OctaveSpectrum s;
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    s.levels_db[b] = level_at(position, b, source_offset, receiver_offset);
  }
  return s;
}

MeasurementPath FieldProvider::nominal_path(const std::string& id) const {
  MeasurementPath path;
  path.id = id;
  const Offset2 zero{};
  for (std::size_t i = 0; i < position_count(); ++i) {
    MeasurementPosition pos;
    pos.distance_m = nominal_distance_m(i);
    pos.spectrum = spectrum_at(i, zero, zero);
    pos.id = std::to_string(i + 1);
    path.positions.push_back(std::move(pos));
  }
  return path;
}

// ---- LogLinearField ------------------------------------------------------

LogLinearField::LogLinearField(std::vector<double> distances_m,
                               std::array<double, kNumOctaveBands> ref_4m_db,
                               std::array<double, kNumOctaveBands> rate_db_per_doubling,
                               std::vector<std::array<double, kNumOctaveBands>> ripple_db)
    : distances_m_(std::move(distances_m)),
      ref_4m_db_(ref_4m_db),
      rate_db_(rate_db_per_doubling),
      ripple_db_(std::move(ripple_db)) {
  for (double r : distances_m_) {
    if (!(r > 0.0)) throw FieldDomainError("field distances must be positive");
  }
  if (!ripple_db_.empty() && ripple_db_.size() != distances_m_.size()) {
    throw FieldDomainError("ripple must have one entry per position");
  }
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    if (ref_4m_db_[b] != kAbsentBand && rate_db_[b] < 0.0) {
      throw FieldDomainError("decay rates must be >= 0");
    }
  }
}

double LogLinearField::nominal_distance_m(std::size_t position) const {
  if (position >= distances_m_.size()) throw FieldDomainError("position out of range");
  return distances_m_[position];
}

double LogLinearField::level_at(std::size_t position, std::size_t band,
                                const Offset2& source_offset,
                                const Offset2& receiver_offset) const {
  if (position >= distances_m_.size() || band >= kNumOctaveBands) {
    throw FieldDomainError("field query out of range");
  }
  check_offset_finite(source_offset);
  check_offset_finite(receiver_offset);
  if (ref_4m_db_[band] == kAbsentBand) return kAbsentBand;

  const double d = displaced_distance(distances_m_[position], source_offset,
                                      receiver_offset);
  if (!(d > 0.0)) {
    throw FieldDomainError("displaced source-receiver distance is not positive");
  }
  double level = ref_4m_db_[band] - rate_db_[band] * std::log2(d / 4.0);
  if (!ripple_db_.empty()) level += ripple_db_[position][band];
  return level;
}

LogLinearField LogLinearField::from_path(const MeasurementPath& path) {
  const std::size_t n = path.positions.size();
  if (n < 2) throw DegenerateGeometryError("field fit needs at least 2 positions");

  std::vector<double> dists(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    dists[i] = path.positions[i].distance_m;
    if (!(dists[i] > 0.0)) throw FieldDomainError("non-positive distance in path");
    x[i] = std::log2(dists[i]);
  }
  const double mean_x = detail::mean(x);
  const double var_x = detail::variance(x, mean_x);
  if (!(var_x > 0.0)) throw DegenerateGeometryError("all distances equal");

  std::array<double, kNumOctaveBands> ref{};
  std::array<double, kNumOctaveBands> rate{};
  std::vector<std::array<double, kNumOctaveBands>> ripple(
      n, std::array<double, kNumOctaveBands>{});

  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    bool all_present = true;
    for (const auto& pos : path.positions) all_present &= pos.spectrum.band_present(b);
    if (!all_present) {
      ref[b] = kAbsentBand;
      rate[b] = 0.0;
      continue;
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = path.positions[i].spectrum.levels_db[b];
    const double mean_y = detail::mean(y);
    const double slope = detail::covariance(x, y, mean_x, mean_y) / var_x;
    rate[b] = std::max(0.0, -slope);
    ref[b] = mean_y + slope * (2.0 - mean_x);
    // keep the exact residuals so that nominal queries reproduce the data
    for (std::size_t i = 0; i < n; ++i) {
      ripple[i][b] = y[i] - (ref[b] - rate[b] * (x[i] - 2.0));
    }
  }
  return LogLinearField(std::move(dists), ref, rate, std::move(ripple));
}

// ---- GridField -------------------------------------------------------------

GridField::GridField(std::vector<double> distances_m, std::vector<PositionGrid> grids,
                     double pitch_m)
    : distances_m_(std::move(distances_m)), grids_(std::move(grids)), pitch_m_(pitch_m) {
  if (distances_m_.size() != grids_.size()) {
    throw FieldDomainError("one grid per position required");
  }
  if (!(pitch_m_ > 0.0)) throw FieldDomainError("grid pitch must be positive");
}

double GridField::nominal_distance_m(std::size_t position) const {
  if (position >= distances_m_.size()) throw FieldDomainError("position out of range");
  return distances_m_[position];
}

double GridField::axis_offset(std::size_t index, double pitch_m) {
  return (static_cast<double>(index) - 1.0) * pitch_m;
}

namespace {

struct AxisCell {
  std::size_t lo;   // lower node index (0 or 1)
  double frac;      // weight of the upper node
};

AxisCell axis_cell(double t, double pitch) {
  t = std::clamp(t, -pitch, pitch);
  if (t < 0.0) return {0, (t + pitch) / pitch};
  return {1, t / pitch};
}

}  // namespace

double GridField::level_at(std::size_t position, std::size_t band,
                           const Offset2& source_offset,
                           const Offset2& receiver_offset) const {
  if (position >= distances_m_.size() || band >= kNumOctaveBands) {
    throw FieldDomainError("field query out of range");
  }
  check_offset_finite(source_offset);
  check_offset_finite(receiver_offset);

  const AxisCell sx = axis_cell(source_offset.dx_m, pitch_m_);
  const AxisCell sy = axis_cell(source_offset.dy_m, pitch_m_);
  const AxisCell rx = axis_cell(receiver_offset.dx_m, pitch_m_);
  const AxisCell ry = axis_cell(receiver_offset.dy_m, pitch_m_);

  const auto& grid = grids_[position][band];
  double level = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double wsx = a ? sx.frac : 1.0 - sx.frac;
    for (int b2 = 0; b2 < 2; ++b2) {
      const double ws = wsx * (b2 ? sy.frac : 1.0 - sy.frac);
      if (ws == 0.0) continue;
      const std::size_t s_node = kGridNodesPerAxis * (sy.lo + b2) + (sx.lo + a);
      for (int c = 0; c < 2; ++c) {
        const double wrx = c ? rx.frac : 1.0 - rx.frac;
        for (int d = 0; d < 2; ++d) {
          const double wr = wrx * (d ? ry.frac : 1.0 - ry.frac);
          if (wr == 0.0) continue;
          const std::size_t r_node = kGridNodesPerAxis * (ry.lo + d) + (rx.lo + c);
          level += ws * wr * grid[s_node][r_node];
        }
      }
    }
  }
  return level;
}

GridField grid_from_loglinear(const LogLinearField& field,
                              std::span<const GridPerturbation> perturbations) {
  const std::size_t n = field.position_count();
  std::vector<GridField::PositionGrid> grids(n);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
      for (std::size_t s = 0; s < kGridNodes; ++s) {
        const Offset2 src{GridField::axis_offset(s % kGridNodesPerAxis, kGridPitchM),
                          GridField::axis_offset(s / kGridNodesPerAxis, kGridPitchM)};
        for (std::size_t r = 0; r < kGridNodes; ++r) {
          const Offset2 rec{GridField::axis_offset(r % kGridNodesPerAxis, kGridPitchM),
                            GridField::axis_offset(r / kGridNodesPerAxis, kGridPitchM)};
          grids[i][b][s][r] = field.level_at(i, b, src, rec);
        }
      }
    }
  }

  for (const auto& pert : perturbations) {
    if (pert.position_index >= n) {
      throw FieldDomainError("perturbation position out of range");
    }
    auto& grid = grids[pert.position_index];
    for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
      for (std::size_t s = 0; s < kGridNodes; ++s) {
        if (GridField::axis_offset(s % kGridNodesPerAxis, kGridPitchM) <= 0.0) continue;
        for (std::size_t r = 0; r < kGridNodes; ++r) grid[b][s][r] += pert.step_db;
      }
    }
  }

  return GridField(field.distances_m(), std::move(grids), kGridPitchM);
}

// ---- synthetic office -------------------------------------------------------

PathGeometry PathGeometry::log_spaced(double first_m, double last_m, std::size_t count) {
  if (count < 2 || !(first_m > 0.0) || !(last_m > first_m)) {
    throw InfeasibleSpecError("log_spaced needs 0 < first < last and count >= 2");
  }
  PathGeometry g;
  g.distances_m.reserve(count);
  const double ratio = last_m / first_m;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    g.distances_m.push_back(first_m * std::pow(ratio, t));
  }
  return g;
}

PathGeometry PathGeometry::default_office() { return log_spaced(2.0, 8.0, 7); }

OfficeConfigSpec OfficeConfigSpec::from_label(std::string_view label) {
  if (label.size() != 3 || label[0] < '1' || label[0] > '4' || label[1] < '1' ||
      label[1] > '2' || label[2] < '1' || label[2] > '2') {
    throw InfeasibleSpecError("office label must be 3 digits: height 1-4, ceiling 1-2, screens 1-2");
  }
  const double h = label[0] - '0';
  const double c = label[1] - '0';
  const double s = label[2] - '0';
  // quality score in [0, 1]: higher screens and class-A surfaces decay faster
  const double q = 0.5 * (4.0 - h) / 3.0 + 0.3 * (2.0 - c) + 0.2 * (2.0 - s);

  OfficeConfigSpec spec;
  spec.d2s_dba = 3.4 + q * (7.5 - 3.4);
  spec.lpas4m_dba = 51.9 - q * (51.9 - 40.6);
  spec.label = std::string(label);
  return spec;
}

SynthOffice synth_office(const OfficeConfigSpec& spec, const PathGeometry& geometry,
                         double threshold_dba) {
  if (geometry.distances_m.size() < 3) {
    throw InfeasibleSpecError("synthetic path needs at least 3 positions");
  }
  if (std::abs(spec.d2s_dba) < 1e-6) {
    throw InfeasibleSpecError("target D2S must be nonzero");
  }
  if (spec.expected_rc_m) {
    const double rc = comfort_distance(spec.d2s_dba, spec.lpas4m_dba, threshold_dba);
    const double tol = std::max(0.01, 0.005 * rc);
    if (std::abs(rc - *spec.expected_rc_m) > tol) {
      throw InfeasibleSpecError("requested rc contradicts (D2S, LpAS4m)");
    }
  }

  std::array<double, kNumOctaveBands> rate{};
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    rate[b] = spec.d2s_dba + spec.rate_spread_db * kRateTilt[b];
    if (rate[b] < 0.0) {
      throw InfeasibleSpecError("rate spread drives a band decay negative");
    }
  }

  // Uncalibrated field, then a one-step affine correction: adding the same
  // (da - dD log2(r/4)) to every band shifts the aggregate by exactly that
  // amount, so the aggregate fit lands exactly on target.
  LogLinearField raw(geometry.distances_m, kOfficeSpectrumShapeDb, rate);
  const SnqFit fit0 = fit_path(raw.nominal_path(), threshold_dba);
  const double dd = spec.d2s_dba - fit0.snq.d2s_dba;
  const double da = spec.lpas4m_dba - fit0.snq.lpas4m_dba;

  std::array<double, kNumOctaveBands> ref{};
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    ref[b] = kOfficeSpectrumShapeDb[b] + da;
    rate[b] += dd;
    if (rate[b] < 0.0) {
      throw InfeasibleSpecError("calibration drives a band decay negative");
    }
  }

  std::vector<std::array<double, kNumOctaveBands>> ripple;
  if (spec.ripple_db != 0.0) {
    const std::size_t n = geometry.distances_m.size();
    std::vector<double> x(n), e(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::log2(geometry.distances_m[i]);
      // deterministic quasi-random pattern (golden-angle phases)
      e[i] = spec.ripple_db * std::cos(2.3999632297286533 * static_cast<double>(i));
    }
    // remove the component the regression would see, so the ripple lands
    // entirely in the residuals and the SNQ targets stay exact
    const double mean_x = detail::mean(x);
    const double mean_e = detail::mean(e);
    const double slope = detail::covariance(x, e, mean_x, mean_e) /
                         detail::variance(x, mean_x);
    ripple.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double fitted = mean_e + slope * (x[i] - mean_x);
      ripple[i].fill(e[i] - fitted);
    }
  }

  LogLinearField field(geometry.distances_m, ref, rate, std::move(ripple));
  SynthOffice out{field.nominal_path(spec.label.empty() ? "synthetic" : spec.label),
                  std::move(field)};
  return out;
}

}  // namespace snq
