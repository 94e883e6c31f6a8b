#include "snq/octave.hpp"

#include <cmath>

namespace snq {

OctaveSpectrum OctaveSpectrum::flat(double level_db) {
  OctaveSpectrum s;
  s.levels_db.fill(level_db);
  return s;
}

OctaveSpectrum OctaveSpectrum::single_band(std::size_t band, double level_db) {
  OctaveSpectrum s;
  s.levels_db.fill(kAbsentBand);
  s.levels_db[band] = level_db;
  return s;
}

bool OctaveSpectrum::band_present(std::size_t band) const {
  return levels_db[band] != kAbsentBand;
}

std::size_t OctaveSpectrum::bands_present() const {
  std::size_t n = 0;
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) n += band_present(b) ? 1 : 0;
  return n;
}

OctaveSpectrum OctaveSpectrum::shifted(double delta_db) const {
  OctaveSpectrum s = *this;
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    if (s.band_present(b)) s.levels_db[b] += delta_db;
  }
  return s;
}

double a_weighted_level(const OctaveSpectrum& spectrum) {
  double sum = 0.0;
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    if (!spectrum.band_present(b)) continue;
    sum += std::pow(10.0, (spectrum.levels_db[b] + kAWeightingDb[b]) / 10.0);
  }
  if (sum <= 0.0) return kAbsentBand;
  return 10.0 * std::log10(sum);
}

}  // namespace snq
