#include "snq/path.hpp"

#include <cmath>
#include <sstream>

namespace snq {

std::vector<Diagnostic> validate_path(const MeasurementPath& path) {
  std::vector<Diagnostic> out;
  const std::size_t n = path.positions.size();

  if (n < 3) {
    out.push_back({Severity::kError, "insufficient_positions",
                   "regression needs at least 3 positions, got " + std::to_string(n),
                   std::nullopt});
  } else if (n == 3) {
    out.push_back({Severity::kWarning, "few_positions",
                   "only 3 positions; uncertainties will be large", std::nullopt});
  }

  bool any_valid_distance = false;
  bool distinct = false;
  double first_distance = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pos = path.positions[i];
    if (!(pos.distance_m > 0.0) || !std::isfinite(pos.distance_m)) {
      out.push_back({Severity::kError, "non_positive_distance",
                     "non-positive distance at position " + std::to_string(i), i});
      continue;
    }
    if (!any_valid_distance) {
      any_valid_distance = true;
      first_distance = pos.distance_m;
    } else if (pos.distance_m != first_distance) {
      distinct = true;
    }

    std::size_t present = 0;
    for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
      const double level = pos.spectrum.levels_db[b];
      if (level == kAbsentBand) continue;
      ++present;
      if (!std::isfinite(level)) {
        out.push_back({Severity::kError, "invalid_level",
                       "non-finite level in band " + std::to_string(b) +
                           " at position " + std::to_string(i),
                       i});
      }
    }
    if (present == 0) {
      out.push_back({Severity::kError, "empty_spectrum",
                     "no octave band present at position " + std::to_string(i), i});
    }
  }

  if (n >= 2 && any_valid_distance && !distinct) {
    out.push_back({Severity::kError, "zero_abscissa_variance",
                   "all distances equal; slope is undefined", std::nullopt});
  }

  for (std::size_t i = 1; i < n; ++i) {
    if (path.positions[i].distance_m <= path.positions[i - 1].distance_m) {
      out.push_back({Severity::kWarning, "non_monotone_distances",
                     "distances are not strictly increasing at position " +
                         std::to_string(i),
                     i});
      break;
    }
  }

  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::kError) return true;
  }
  return false;
}

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream os;
  for (const auto& d : diagnostics) {
    os << (d.severity == Severity::kError ? "error" : "warning") << ": " << d.code
       << ": " << d.message << '\n';
  }
  return os.str();
}

}  // namespace snq
