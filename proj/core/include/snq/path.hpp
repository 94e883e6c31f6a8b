#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "snq/octave.hpp"

namespace snq {

/// One microphone position on a measurement path.
struct MeasurementPosition {
  double distance_m = 0.0;  ///< distance from the source centre, > 0
  OctaveSpectrum spectrum;
  std::string id;  ///< optional label from the input file
};

/// Ordered positions along a (virtual) straight line from an omnidirectional
/// source. The spatial-decay regression needs at least three positions and at
/// least two distinct distances.
struct MeasurementPath {
  std::string id;
  std::vector<MeasurementPosition> positions;

  std::size_t size() const { return positions.size(); }
};

enum class Severity { kWarning, kError };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::string code;     ///< stable machine-readable identifier
  std::string message;  ///< human-readable detail
  std::optional<std::size_t> position_index;
};

/// Checks the path invariants. Errors block computation, warnings do not.
/// Codes emitted:
///   error   insufficient_positions   N < 3
///   error   non_positive_distance    r <= 0 or not finite
///   error   zero_abscissa_variance   all distances equal
///   error   invalid_level            NaN or +inf band level
///   error   empty_spectrum           no band present at a position
///   warning few_positions            N == 3
///   warning non_monotone_distances   distances not strictly increasing
std::vector<Diagnostic> validate_path(const MeasurementPath& path);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

/// Concatenates diagnostics into one line per entry (for logs and stderr).
std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

}  // namespace snq
