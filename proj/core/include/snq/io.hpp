#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "snq/area.hpp"
#include "snq/error_model.hpp"
#include "snq/errors.hpp"
#include "snq/field.hpp"
#include "snq/monte_carlo.hpp"
#include "snq/path.hpp"
#include "snq/uncertainty.hpp"

namespace snq {

inline constexpr int kFormatVersion = 1;

/// Measurement file content: one acoustic area, at least one path.
struct MeasurementArea {
  int format_version = kFormatVersion;
  std::string area_id;
  std::vector<MeasurementPath> paths;
};

enum class FileFormat { kCsv, kJson };

/// Guesses from the extension (.csv / .json), falls back to content sniffing.
FileFormat detect_format(const std::filesystem::path& file, std::string_view content);

/// Parses the documented CSV or JSON measurement schema.
///
/// Throws ParseError (with 1-based line and field for CSV) on malformed
/// input and ValidationError when structurally sound data violates the
/// domain invariants. Warnings from validate_path are appended to
/// `warnings` when given, never thrown.
MeasurementArea parse_measurement(std::string_view text, FileFormat format,
                                  std::vector<Diagnostic>* warnings = nullptr);

MeasurementArea load_measurement(const std::filesystem::path& file,
                                 std::vector<Diagnostic>* warnings = nullptr);

std::string write_measurement_csv(const MeasurementArea& area);
std::string write_measurement_json(const MeasurementArea& area);

/// Validation failure carrying the full diagnostic list.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::vector<Diagnostic> diagnostics)
      : Error(message), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Run configuration (JSON). Every field is optional and overrides the
/// defaults; values are validated against the type invariants on load.
struct RunConfig {
  OctaveUncertaintyTable octave_table;
  DistanceErrorModel dist_model;
  double threshold_dba = kDefaultThresholdDba;
  double coverage_k = 2.0;
  McConfig mc;
  bool couple_levels_to_position = false;
  /// Whether u_r in the closed-form budget includes the positioning
  /// contribution (combined, default) or only the instrument term.
  enum class URMode { kCombined, kTapeOnly } u_r_mode = URMode::kCombined;
  std::optional<double> override_u_level_db;  ///< homogeneous u_L for all positions
  std::optional<double> override_u_r_m;       ///< direct u_r, bypassing the model

  double effective_u_r_m() const;
  std::vector<double> effective_u_levels(const MeasurementPath& path) const;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& file);

// ---- field files --------------------------------------------------------

std::string write_field_json(const LogLinearField& field);
std::string write_field_json(const GridField& field);

/// Dispatches on the "kind" key ("log_linear_field" / "grid_field").
std::unique_ptr<FieldProvider> parse_field_json(std::string_view json_text);
std::unique_ptr<FieldProvider> load_field(const std::filesystem::path& file);

// ---- reports ------------------------------------------------------------

/// Reported (human-readable) uncertainties are rounded up to the next
/// one-tenth, the usual practice for measurement uncertainties; machine
/// output keeps the raw values.
double round_up_tenth(double value);

struct PathReport {
  std::string path_id;
  SnqFit fit;
  std::optional<AnalyticBudget> analytic;
  std::optional<McResult> mc;
};

struct AreaReport {
  std::string area_id;
  double threshold_dba = kDefaultThresholdDba;
  double coverage_k = 2.0;
  std::vector<PathReport> paths;
  std::optional<AreaResult> area;
};

std::string write_report_json(const AreaReport& report);

/// Plot-data series (data only; rendering is left to external tools).
std::string decay_points_csv(const AreaReport& report);
std::string intervals_csv(const AreaReport& report);
std::string histograms_csv(const AreaReport& report);

}  // namespace snq
