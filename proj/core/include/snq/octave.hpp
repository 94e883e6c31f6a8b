#pragma once

#include <array>
#include <cstddef>
#include <limits>

namespace snq {

inline constexpr std::size_t kNumOctaveBands = 7;

/// Octave-band centre frequencies, 125 Hz to 8 kHz.
inline constexpr std::array<double, kNumOctaveBands> kOctaveCentresHz = {
    125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0};

/// A-weighting at the octave centre frequencies (IEC 61672-1).
inline constexpr std::array<double, kNumOctaveBands> kAWeightingDb = {
    -16.1, -8.6, -3.2, 0.0, +1.2, +1.0, -1.1};

/// Sentinel for a band that was not measured. Absent bands contribute zero
/// energy to A-weighted sums and zero weight to level uncertainties.
inline constexpr double kAbsentBand = -std::numeric_limits<double>::infinity();

/// Sound pressure levels in dB for the seven octave bands, in ascending
/// centre-frequency order.
struct OctaveSpectrum {
  std::array<double, kNumOctaveBands> levels_db{};

  static OctaveSpectrum flat(double level_db);
  /// All bands absent except one.
  static OctaveSpectrum single_band(std::size_t band, double level_db);

  bool band_present(std::size_t band) const;
  std::size_t bands_present() const;

  /// Same spectrum with every present band shifted by delta_db.
  OctaveSpectrum shifted(double delta_db) const;
};

/// Energetic A-weighted sum over the present bands:
///   10 * log10( sum 10^((L_oct + A_oct)/10) )
/// Returns -inf if no band is present.
double a_weighted_level(const OctaveSpectrum& spectrum);

}  // namespace snq
