#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snq/octave.hpp"
#include "snq/path.hpp"

namespace snq {

/// Horizontal displacement of a device from its nominal position, metres.
/// dx is along the measurement line (positive away from the source).
struct Offset2 {
  double dx_m = 0.0;
  double dy_m = 0.0;
};

/// A sound field that can be sampled at displaced source / receiver
/// positions. Stand-in for a measured or simulated office, used by the
/// Monte-Carlo measurement emulation.
class FieldProvider {
 public:
  virtual ~FieldProvider() = default;

  virtual std::size_t position_count() const = 0;
  virtual double nominal_distance_m(std::size_t position) const = 0;

  /// Octave-band level at one position for the given device offsets.
  virtual double level_at(std::size_t position, std::size_t band,
                          const Offset2& source_offset,
                          const Offset2& receiver_offset) const = 0;

  OctaveSpectrum spectrum_at(std::size_t position, const Offset2& source_offset,
                             const Offset2& receiver_offset) const;

  /// Nominal (zero-offset) measurement path built from this field.
  MeasurementPath nominal_path(const std::string& id = "field") const;
};

/// Idealized decay field: per band, level(r) = ref_4m - rate * log2(r/4),
/// plus an optional per-position (optionally per-band) deterministic ripple
/// emulating fitting / reflection irregularities. Offsets displace the
/// devices in the plane; the level is evaluated at the displaced distance.
class LogLinearField final : public FieldProvider {
 public:
  LogLinearField(std::vector<double> distances_m,
                 std::array<double, kNumOctaveBands> ref_4m_db,
                 std::array<double, kNumOctaveBands> rate_db_per_doubling,
                 std::vector<std::array<double, kNumOctaveBands>> ripple_db = {});

  /// Field that reproduces a measured path exactly at the nominal positions:
  /// per-band regression plus the exact residuals as ripple.
  static LogLinearField from_path(const MeasurementPath& path);

  std::size_t position_count() const override { return distances_m_.size(); }
  double nominal_distance_m(std::size_t position) const override;
  double level_at(std::size_t position, std::size_t band,
                  const Offset2& source_offset,
                  const Offset2& receiver_offset) const override;

  const std::vector<double>& distances_m() const { return distances_m_; }
  const std::array<double, kNumOctaveBands>& ref_4m_db() const { return ref_4m_db_; }
  const std::array<double, kNumOctaveBands>& rate_db() const { return rate_db_; }
  const std::vector<std::array<double, kNumOctaveBands>>& ripple_db() const {
    return ripple_db_;
  }

 private:
  std::vector<double> distances_m_;
  std::array<double, kNumOctaveBands> ref_4m_db_;
  std::array<double, kNumOctaveBands> rate_db_;
  std::vector<std::array<double, kNumOctaveBands>> ripple_db_;  // empty = none
};

inline constexpr std::size_t kGridNodesPerAxis = 3;
inline constexpr std::size_t kGridNodes = kGridNodesPerAxis * kGridNodesPerAxis;
inline constexpr double kGridPitchM = 0.10;

/// Levels sampled on a 3x3 source-offset grid crossed with a 3x3
/// receiver-offset grid (81 values per position per band). Node offsets per
/// axis are {-pitch, 0, +pitch}; node index = 3*iy + ix. Queries are
/// interpolated bilinearly in the source plane and in the receiver plane;
/// offsets beyond +-pitch are clamped to the boundary.
class GridField final : public FieldProvider {
 public:
  /// levels[band][source_node][receiver_node]
  using PositionGrid =
      std::array<std::array<std::array<double, kGridNodes>, kGridNodes>,
                 kNumOctaveBands>;

  GridField(std::vector<double> distances_m, std::vector<PositionGrid> grids,
            double pitch_m = kGridPitchM);

  std::size_t position_count() const override { return distances_m_.size(); }
  double nominal_distance_m(std::size_t position) const override;
  double level_at(std::size_t position, std::size_t band,
                  const Offset2& source_offset,
                  const Offset2& receiver_offset) const override;

  double pitch_m() const { return pitch_m_; }
  const std::vector<double>& distances_m() const { return distances_m_; }
  const std::vector<PositionGrid>& grids() const { return grids_; }
  std::vector<PositionGrid>& grids() { return grids_; }

  static double axis_offset(std::size_t index, double pitch_m);

 private:
  std::vector<double> distances_m_;
  std::vector<PositionGrid> grids_;
  double pitch_m_;
};

/// Level step added to all bands of one position for source-offset nodes in
/// the dx > 0 half-plane. Used to inject the sharp near-source gradients that
/// couple positioning errors into measured levels.
struct GridPerturbation {
  std::size_t position_index = 0;
  double step_db = 0.0;
};

GridField grid_from_loglinear(const LogLinearField& field,
                              std::span<const GridPerturbation> perturbations = {});

/// Nominal receiver distances of a measurement line.
struct PathGeometry {
  std::vector<double> distances_m;

  static PathGeometry log_spaced(double first_m, double last_m, std::size_t count);
  /// Seven log-spaced workstations from 2 m to 8 m, the desk-scale default.
  static PathGeometry default_office();
};

/// Target SNQs for the synthetic office generator, either explicit or mapped
/// from a three-digit configuration label "hcs":
///   h in 1..4  screen height class (1 = 190 cm .. 4 = 110 cm)
///   c in 1..2  ceiling absorption class (1 = class A, 2 = class C)
///   s in 1..2  screen absorption class
/// Labels interpolate D2S over [3.4, 7.5] dB(A) and LpAS4m over
/// [51.9, 40.6] dB(A); "111" maps to the best corner (7.5, 40.6).
struct OfficeConfigSpec {
  double d2s_dba = 5.0;
  double lpas4m_dba = 48.0;
  double rate_spread_db = 0.0;  ///< per-band decay tilt, high bands decay faster
  double ripple_db = 0.0;       ///< residual amplitude, orthogonal to the fit
  std::optional<double> expected_rc_m;  ///< cross-checked against the rc identity
  std::string label;

  static OfficeConfigSpec from_label(std::string_view label);
};

struct SynthOffice {
  MeasurementPath path;     ///< nominal measurement data
  LogLinearField field;     ///< the generating field
};

/// Builds a field and its nominal measurement whose aggregate SNQs equal the
/// spec targets (to rounding). The per-band reference levels follow a
/// speech-like office spectrum; rate_spread tilts the per-band decays while a
/// one-step affine calibration keeps the aggregate fit exactly on target.
/// Throws InfeasibleSpecError when expected_rc_m contradicts the targets.
SynthOffice synth_office(const OfficeConfigSpec& spec,
                         const PathGeometry& geometry = PathGeometry::default_office(),
                         double threshold_dba = 45.0);

}  // namespace snq
