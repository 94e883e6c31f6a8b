#pragma once

#include <array>

#include "snq/octave.hpp"

namespace snq {

/// Standard uncertainties of octave-band levels in dB. Defaults are the
/// class-1 sound level meter tolerances deduced from IEC 61672-1 (2003).
struct OctaveUncertaintyTable {
  std::array<double, kNumOctaveBands> u_oct_db = {0.9, 0.9, 0.8, 0.8, 0.9, 1.2, 1.8};

  static OctaveUncertaintyTable iec61672_class1() { return {}; }
};

/// Inverse error function (Newton refinement on std::erf). |p| < 1.
double inverse_erf(double p);

/// Distance error model: instrument (tape / rangefinder) uncertainty plus the
/// apparatus-positioning dispersion.
///
/// Positioning is modelled as an independent normal error on each horizontal
/// axis, calibrated so the device lands inside a square of side
/// `square_side_m`, centred on its nominal position, with probability
/// `square_coverage`. With the 20 cm / 95 % defaults the per-axis sigma is
/// about 4.47 cm and the induced source-receiver distance uncertainty
/// sqrt(2)*sigma is about 6.3 cm.
struct DistanceErrorModel {
  double u_tape_m = 0.05;
  double square_side_m = 0.20;
  double square_coverage = 0.95;

  /// Per-axis sigma solving P(|X| <= side/2)^2 = coverage.
  double positioning_sigma_m() const;

  /// Distance uncertainty induced by positioning both devices: sqrt(2)*sigma.
  double u_pos_m() const;

  /// Quadrature combination of the tape and positioning contributions.
  double u_r_total_m() const;
};

}  // namespace snq
