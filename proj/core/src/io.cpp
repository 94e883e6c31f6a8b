#include "snq/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace snq {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  // shortest round-trip representation
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t line, const std::string& field) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last != first && std::isspace(static_cast<unsigned char>(*(last - 1)))) --last;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ParseError("cannot parse number '" + std::string(text) + "'", line, field);
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

const std::array<std::string, 4 + kNumOctaveBands> kCsvHeader = {
    "area_id", "path_id",  "position_id", "distance_m", "L125", "L250",
    "L500",    "L1000",    "L2000",       "L4000",      "L8000"};

void validate_area(const MeasurementArea& area, std::vector<Diagnostic>* warnings) {
  std::vector<Diagnostic> errors;
  std::vector<std::string> seen_paths;
  for (const auto& path : area.paths) {
    if (std::find(seen_paths.begin(), seen_paths.end(), path.id) != seen_paths.end()) {
      errors.push_back({Severity::kError, "duplicate_path_id",
                        "duplicate path id '" + path.id + "'", std::nullopt});
    }
    seen_paths.push_back(path.id);

    std::vector<std::string> seen_positions;
    for (const auto& pos : path.positions) {
      if (!pos.id.empty() &&
          std::find(seen_positions.begin(), seen_positions.end(), pos.id) !=
              seen_positions.end()) {
        errors.push_back({Severity::kError, "duplicate_position_id",
                          "duplicate position id '" + pos.id + "' in path '" +
                              path.id + "'",
                          std::nullopt});
      }
      seen_positions.push_back(pos.id);
    }

    for (auto& d : validate_path(path)) {
      d.message = "path '" + path.id + "': " + d.message;
      if (d.severity == Severity::kError) {
        errors.push_back(std::move(d));
      } else if (warnings) {
        warnings->push_back(std::move(d));
      }
    }
  }
  if (!errors.empty()) {
    throw ValidationError("measurement data violates invariants:\n" +
                              format_diagnostics(errors),
                          std::move(errors));
  }
}

MeasurementArea parse_measurement_csv(std::string_view text,
                                      std::vector<Diagnostic>* warnings) {
  MeasurementArea area;
  std::map<std::string, std::size_t> path_index;
  bool header_seen = false;
  bool area_id_seen = false;

  std::istringstream stream{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      // pragma lines: "# key=value"
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(line.substr(1, eq - 1));
        if (key == "format_version") {
          const std::string value = trim(line.substr(eq + 1));
          if (value != "1") {
            throw ParseError("unsupported format_version '" + value + "'", line_no,
                             "format_version");
          }
          area.format_version = 1;
        }
      }
      continue;
    }

    const auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != kCsvHeader.size()) {
        const std::size_t bands = fields.size() >= 4 ? fields.size() - 4 : 0;
        throw ParseError("expected 7 octave bands, header has " + std::to_string(bands) +
                             " band columns",
                         line_no, "header");
      }
      for (std::size_t i = 0; i < kCsvHeader.size(); ++i) {
        if (trim(fields[i]) != kCsvHeader[i]) {
          throw ParseError("unexpected header column '" + trim(fields[i]) +
                               "', expected '" + kCsvHeader[i] + "'",
                           line_no, kCsvHeader[i]);
        }
      }
      header_seen = true;
      continue;
    }

    if (fields.size() != kCsvHeader.size()) {
      throw ParseError("expected " + std::to_string(kCsvHeader.size()) +
                           " columns, got " + std::to_string(fields.size()),
                       line_no, "row");
    }

    const std::string row_area = trim(fields[0]);
    if (!area_id_seen) {
      area.area_id = row_area;
      area_id_seen = true;
    } else if (row_area != area.area_id) {
      throw ParseError("file mixes area ids '" + area.area_id + "' and '" + row_area +
                           "'",
                       line_no, "area_id");
    }

    const std::string path_id = trim(fields[1]);
    auto [it, inserted] = path_index.try_emplace(path_id, area.paths.size());
    if (inserted) {
      area.paths.push_back({path_id, {}});
    }
    MeasurementPath& path = area.paths[it->second];

    MeasurementPosition pos;
    pos.id = trim(fields[2]);
    pos.distance_m = parse_double(fields[3], line_no, "distance_m");
    for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
      const std::string cell = trim(fields[4 + b]);
      pos.spectrum.levels_db[b] =
          cell.empty() ? kAbsentBand : parse_double(cell, line_no, kCsvHeader[4 + b]);
    }
    path.positions.push_back(std::move(pos));
  }

  if (!header_seen) throw ParseError("no header row found", line_no, "header");
  if (area.paths.empty()) throw ParseError("no data rows found", line_no, "row");

  validate_area(area, warnings);
  return area;
}

// ---- JSON helpers ----------------------------------------------------------

const json& require_key(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(std::string("missing field '") + key + "'", 0, key);
  }
  return *it;
}

double as_double(const json& j, const char* field) {
  if (!j.is_number()) {
    throw ParseError(std::string("field '") + field + "' must be a number", 0, field);
  }
  return j.get<double>();
}

std::array<double, kNumOctaveBands> as_band_array(const json& j, const char* field,
                                                  bool nulls_allowed) {
  if (!j.is_array() || j.size() != kNumOctaveBands) {
    throw ParseError("expected 7 octave bands in '" + std::string(field) + "', got " +
                         std::to_string(j.is_array() ? j.size() : 0),
                     0, field);
  }
  std::array<double, kNumOctaveBands> out{};
  for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
    if (j[b].is_null()) {
      if (!nulls_allowed) {
        throw ParseError("null not allowed in '" + std::string(field) + "'", 0, field);
      }
      out[b] = kAbsentBand;
    } else {
      out[b] = as_double(j[b], field);
    }
  }
  return out;
}

json band_array_json(const std::array<double, kNumOctaveBands>& levels) {
  json arr = json::array();
  for (double v : levels) {
    if (std::isfinite(v)) {
      arr.push_back(v);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), 0, {});
  }
}

void check_version(const json& j) {
  const int version = require_key(j, "format_version").get<int>();
  if (version != kFormatVersion) {
    throw ParseError("unsupported format_version " + std::to_string(version), 0,
                     "format_version");
  }
}

MeasurementArea parse_measurement_json(std::string_view text,
                                       std::vector<Diagnostic>* warnings) {
  const json j = parse_json_text(text);
  check_version(j);

  MeasurementArea area;
  area.area_id = require_key(j, "area_id").get<std::string>();
  for (const auto& jp : require_key(j, "paths")) {
    MeasurementPath path;
    path.id = require_key(jp, "id").get<std::string>();
    for (const auto& jpos : require_key(jp, "positions")) {
      MeasurementPosition pos;
      if (jpos.contains("id")) pos.id = jpos["id"].get<std::string>();
      pos.distance_m = as_double(require_key(jpos, "distance_m"), "distance_m");
      pos.spectrum.levels_db =
          as_band_array(require_key(jpos, "levels_db"), "levels_db", true);
      path.positions.push_back(std::move(pos));
    }
    area.paths.push_back(std::move(path));
  }
  if (area.paths.empty()) throw ParseError("no paths in file", 0, "paths");

  validate_area(area, warnings);
  return area;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open file '" + file.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

FileFormat detect_format(const std::filesystem::path& file, std::string_view content) {
  const auto ext = file.extension().string();
  if (ext == ".json") return FileFormat::kJson;
  if (ext == ".csv") return FileFormat::kCsv;
  for (char c : content) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{' ? FileFormat::kJson : FileFormat::kCsv;
  }
  return FileFormat::kCsv;
}

MeasurementArea parse_measurement(std::string_view text, FileFormat format,
                                  std::vector<Diagnostic>* warnings) {
  return format == FileFormat::kCsv ? parse_measurement_csv(text, warnings)
                                    : parse_measurement_json(text, warnings);
}

MeasurementArea load_measurement(const std::filesystem::path& file,
                                 std::vector<Diagnostic>* warnings) {
  const std::string content = read_file(file);
  return parse_measurement(content, detect_format(file, content), warnings);
}

std::string write_measurement_csv(const MeasurementArea& area) {
  std::ostringstream os;
  os << "# format_version=1\n";
  for (std::size_t i = 0; i < kCsvHeader.size(); ++i) {
    os << (i ? "," : "") << kCsvHeader[i];
  }
  os << '\n';
  for (const auto& path : area.paths) {
    for (const auto& pos : path.positions) {
      os << area.area_id << ',' << path.id << ',' << pos.id << ','
         << format_double(pos.distance_m);
      for (double level : pos.spectrum.levels_db) {
        os << ',';
        if (std::isfinite(level)) os << format_double(level);
      }
      os << '\n';
    }
  }
  return os.str();
}

std::string write_measurement_json(const MeasurementArea& area) {
  json j;
  j["format_version"] = kFormatVersion;
  j["area_id"] = area.area_id;
  json paths = json::array();
  for (const auto& path : area.paths) {
    json jp;
    jp["id"] = path.id;
    json positions = json::array();
    for (const auto& pos : path.positions) {
      json jpos;
      jpos["id"] = pos.id;
      jpos["distance_m"] = pos.distance_m;
      jpos["levels_db"] = band_array_json(pos.spectrum.levels_db);
      positions.push_back(std::move(jpos));
    }
    jp["positions"] = std::move(positions);
    paths.push_back(std::move(jp));
  }
  j["paths"] = std::move(paths);
  return j.dump(2) + "\n";
}

// ---- run config -------------------------------------------------------------

namespace {

void config_invariant(bool ok, const std::string& what) {
  if (!ok) {
    std::vector<Diagnostic> diag{{Severity::kError, "invalid_config", what, std::nullopt}};
    throw ValidationError("config violates invariants: " + what, std::move(diag));
  }
}

}  // namespace

double RunConfig::effective_u_r_m() const {
  if (override_u_r_m) return *override_u_r_m;
  return u_r_mode == URMode::kCombined ? dist_model.u_r_total_m() : dist_model.u_tape_m;
}

std::vector<double> RunConfig::effective_u_levels(const MeasurementPath& path) const {
  if (override_u_level_db) {
    return std::vector<double>(path.positions.size(), *override_u_level_db);
  }
  return level_uncertainties(path, octave_table);
}

RunConfig parse_run_config(std::string_view json_text) {
  const json j = parse_json_text(json_text);
  if (j.contains("format_version")) check_version(j);

  RunConfig cfg;
  if (j.contains("octave_uncertainty_db")) {
    cfg.octave_table.u_oct_db =
        as_band_array(j["octave_uncertainty_db"], "octave_uncertainty_db", false);
    for (double u : cfg.octave_table.u_oct_db) {
      config_invariant(u > 0.0 && std::isfinite(u), "octave uncertainties must be > 0");
    }
  }
  if (j.contains("u_tape_m")) cfg.dist_model.u_tape_m = as_double(j["u_tape_m"], "u_tape_m");
  if (j.contains("square_side_m")) {
    cfg.dist_model.square_side_m = as_double(j["square_side_m"], "square_side_m");
  }
  if (j.contains("square_coverage")) {
    cfg.dist_model.square_coverage = as_double(j["square_coverage"], "square_coverage");
  }
  config_invariant(cfg.dist_model.u_tape_m >= 0.0, "u_tape_m must be >= 0");
  config_invariant(cfg.dist_model.square_side_m > 0.0, "square_side_m must be > 0");
  config_invariant(cfg.dist_model.square_coverage > 0.0 &&
                       cfg.dist_model.square_coverage < 1.0,
                   "square_coverage must be in (0, 1)");

  if (j.contains("threshold_dba")) cfg.threshold_dba = as_double(j["threshold_dba"], "threshold_dba");
  if (j.contains("coverage_k")) cfg.coverage_k = as_double(j["coverage_k"], "coverage_k");
  config_invariant(cfg.coverage_k > 0.0, "coverage_k must be > 0");

  if (j.contains("u_r_mode")) {
    const std::string mode = j["u_r_mode"].get<std::string>();
    if (mode == "combined") {
      cfg.u_r_mode = RunConfig::URMode::kCombined;
    } else if (mode == "tape_only") {
      cfg.u_r_mode = RunConfig::URMode::kTapeOnly;
    } else {
      throw ParseError("u_r_mode must be 'combined' or 'tape_only'", 0, "u_r_mode");
    }
  }
  if (j.contains("override_u_level_db")) {
    if (!j["override_u_level_db"].is_null()) {
      cfg.override_u_level_db = as_double(j["override_u_level_db"], "override_u_level_db");
      config_invariant(*cfg.override_u_level_db >= 0.0, "override_u_level_db must be >= 0");
    }
  }
  if (j.contains("override_u_r_m")) {
    if (!j["override_u_r_m"].is_null()) {
      cfg.override_u_r_m = as_double(j["override_u_r_m"], "override_u_r_m");
      config_invariant(*cfg.override_u_r_m >= 0.0, "override_u_r_m must be >= 0");
    }
  }
  if (j.contains("couple_levels_to_position")) {
    cfg.couple_levels_to_position = j["couple_levels_to_position"].get<bool>();
  }

  if (j.contains("mc")) {
    const json& m = j["mc"];
    if (m.contains("seed")) cfg.mc.seed = m["seed"].get<std::uint64_t>();
    if (m.contains("batch_size")) cfg.mc.batch_size = m["batch_size"].get<std::size_t>();
    if (m.contains("max_batches")) cfg.mc.max_batches = m["max_batches"].get<std::size_t>();
    if (m.contains("min_runs")) cfg.mc.min_runs = m["min_runs"].get<std::size_t>();
    if (m.contains("tol_level_db")) cfg.mc.tol_level_db = as_double(m["tol_level_db"], "tol_level_db");
    if (m.contains("tol_rc_m")) cfg.mc.tol_rc_m = as_double(m["tol_rc_m"], "tol_rc_m");
    if (m.contains("threads")) cfg.mc.threads = m["threads"].get<unsigned>();
    if (m.contains("keep_samples")) cfg.mc.keep_samples = m["keep_samples"].get<bool>();
    if (m.contains("histogram_bins")) {
      cfg.mc.histogram_bins = m["histogram_bins"].get<std::size_t>();
    }
    config_invariant(cfg.mc.batch_size >= 1000, "mc.batch_size must be >= 1000");
    config_invariant(cfg.mc.tol_level_db > 0.0 && cfg.mc.tol_rc_m > 0.0,
                     "mc tolerances must be > 0");
  }
  cfg.mc.coverage_k = cfg.coverage_k;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  return parse_run_config(read_file(file));
}

// ---- field files ------------------------------------------------------------

std::string write_field_json(const LogLinearField& field) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "log_linear_field";
  j["distances_m"] = field.distances_m();
  j["ref_level_4m_db"] = band_array_json(field.ref_4m_db());
  j["decay_per_doubling_db"] = field.rate_db();
  if (!field.ripple_db().empty()) {
    json ripple = json::array();
    for (const auto& row : field.ripple_db()) ripple.push_back(row);
    j["ripple_db"] = std::move(ripple);
  }
  return j.dump(2) + "\n";
}

std::string write_field_json(const GridField& field) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "grid_field";
  j["pitch_m"] = field.pitch_m();
  j["band_centres_hz"] = kOctaveCentresHz;
  json positions = json::array();
  for (std::size_t i = 0; i < field.position_count(); ++i) {
    json jp;
    jp["distance_m"] = field.distances_m()[i];
    json bands = json::array();
    for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
      json src_rows = json::array();
      for (std::size_t s = 0; s < kGridNodes; ++s) {
        json row = json::array();
        for (std::size_t r = 0; r < kGridNodes; ++r) {
          const double v = field.grids()[i][b][s][r];
          if (std::isfinite(v)) {
            row.push_back(v);
          } else {
            row.push_back(nullptr);
          }
        }
        src_rows.push_back(std::move(row));
      }
      bands.push_back(std::move(src_rows));
    }
    jp["levels_db"] = std::move(bands);
    positions.push_back(std::move(jp));
  }
  j["positions"] = std::move(positions);
  return j.dump() + "\n";
}

std::unique_ptr<FieldProvider> parse_field_json(std::string_view json_text) {
  const json j = parse_json_text(json_text);
  check_version(j);
  const std::string kind = require_key(j, "kind").get<std::string>();

  if (kind == "log_linear_field") {
    std::vector<double> distances =
        require_key(j, "distances_m").get<std::vector<double>>();
    const auto ref = as_band_array(require_key(j, "ref_level_4m_db"),
                                   "ref_level_4m_db", true);
    const auto rate = as_band_array(require_key(j, "decay_per_doubling_db"),
                                    "decay_per_doubling_db", false);
    std::vector<std::array<double, kNumOctaveBands>> ripple;
    if (j.contains("ripple_db")) {
      for (const auto& row : j["ripple_db"]) {
        ripple.push_back(as_band_array(row, "ripple_db", false));
      }
      if (ripple.size() != distances.size()) {
        throw ParseError("ripple_db must have one row per position", 0, "ripple_db");
      }
    }
    return std::make_unique<LogLinearField>(std::move(distances), ref, rate,
                                            std::move(ripple));
  }

  if (kind == "grid_field") {
    const double pitch = as_double(require_key(j, "pitch_m"), "pitch_m");
    std::vector<double> distances;
    std::vector<GridField::PositionGrid> grids;
    for (const auto& jp : require_key(j, "positions")) {
      distances.push_back(as_double(require_key(jp, "distance_m"), "distance_m"));
      const json& bands = require_key(jp, "levels_db");
      if (!bands.is_array() || bands.size() != kNumOctaveBands) {
        throw ParseError("levels_db must hold 7 bands", 0, "levels_db");
      }
      GridField::PositionGrid grid{};
      for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
        const json& rows = bands[b];
        if (!rows.is_array() || rows.size() != kGridNodes) {
          throw ParseError("each band needs 9 source rows", 0, "levels_db");
        }
        for (std::size_t s = 0; s < kGridNodes; ++s) {
          const json& row = rows[s];
          if (!row.is_array() || row.size() != kGridNodes) {
            throw ParseError("each source row needs 9 receiver levels", 0, "levels_db");
          }
          for (std::size_t r = 0; r < kGridNodes; ++r) {
            grid[b][s][r] = row[r].is_null() ? kAbsentBand : as_double(row[r], "levels_db");
          }
        }
      }
      grids.push_back(grid);
    }
    return std::make_unique<GridField>(std::move(distances), std::move(grids), pitch);
  }

  throw ParseError("unknown field kind '" + kind + "'", 0, "kind");
}

std::unique_ptr<FieldProvider> load_field(const std::filesystem::path& file) {
  return parse_field_json(read_file(file));
}

// ---- reports ----------------------------------------------------------------

double round_up_tenth(double value) {
  if (!std::isfinite(value)) return value;
  return std::ceil(value * 10.0 - 1e-9) / 10.0;
}

namespace {

json split_json(const UncertaintySplit& s) {
  return json{{"level_var", s.u2_level}, {"distance_var", s.u2_dist}, {"u", s.u()}};
}

json mc_scalar_json(const McScalarResult& s) {
  json h;
  h["lo"] = s.histogram.lo;
  h["hi"] = s.histogram.hi;
  h["counts"] = s.histogram.counts;
  return json{{"mean", s.mean},
              {"stddev", s.stddev},
              {"normal", s.normality.normal},
              {"skewness", s.normality.skewness},
              {"excess_kurtosis", s.normality.excess_kurtosis},
              {"histogram", std::move(h)}};
}

json pooled_json(const PooledSnq& p) {
  json overlap = json::array();
  for (const auto& row : p.overlap) {
    overlap.push_back(row);
  }
  return json{{"pooled_mean", p.pooled_mean},
              {"between_var", p.between_var},
              {"mean_within_var", p.mean_within_var},
              {"pooled_u", p.pooled_u},
              {"unique_value_ok", p.unique_value_ok},
              {"overlap", std::move(overlap)}};
}

}  // namespace

std::string write_report_json(const AreaReport& report) {
  json j;
  j["format_version"] = kFormatVersion;
  j["area_id"] = report.area_id;
  j["threshold_dba"] = report.threshold_dba;
  j["coverage_k"] = report.coverage_k;

  json paths = json::array();
  for (const auto& p : report.paths) {
    json jp;
    jp["id"] = p.path_id;
    jp["n_positions"] = p.fit.level_dba.size();
    jp["snq"] = {{"d2s_dba", p.fit.snq.d2s_dba},
                 {"lpas4m_dba", p.fit.snq.lpas4m_dba},
                 {"rc_m", p.fit.snq.rc_m}};

    if (p.analytic) {
      const auto& a = *p.analytic;
      jp["analytic"] = {
          {"u_d2s_dba", a.budget.u_d2s_dba()},
          {"u_lpas4m_dba", a.budget.u_lpas4m_dba()},
          {"u_rc_m", a.budget.u_rc_m()},
          {"reported",
           {{"u_d2s_dba", round_up_tenth(a.budget.u_d2s_dba())},
            {"u_lpas4m_dba", round_up_tenth(a.budget.u_lpas4m_dba())},
            {"u_rc_m", round_up_tenth(a.budget.u_rc_m())}}},
          {"split",
           {{"d2s", split_json(a.budget.d2s)},
            {"lpas4m", split_json(a.budget.lpas4m)},
            {"rc", split_json(a.budget.rc)}}},
          {"terms",
           {{"t3", a.terms.t3},
            {"t4", a.terms.t4},
            {"t5", a.terms.t5},
            {"t6", a.terms.t6},
            {"cov_x_centered_ul2", a.terms.cov_x_centered_ul2},
            {"cov_alpha_centered_over_r2", a.terms.cov_alpha_centered_over_r2},
            {"cov_alpha_inv_r2", a.terms.cov_alpha_inv_r2},
            {"cov_x_ul2", a.terms.cov_x_ul2}}},
          {"u_r_m", a.u_r_m},
          {"form_mismatch", a.form_mismatch}};
    }

    if (p.mc) {
      const auto& m = *p.mc;
      jp["mc"] = {{"runs_used", m.runs_used},
                  {"dropped_runs", m.dropped_runs},
                  {"converged", m.converged},
                  {"converged_at_runs", m.converged_at_runs},
                  {"d2s", mc_scalar_json(m.d2s)},
                  {"lpas4m", mc_scalar_json(m.lpas4m)},
                  {"rc", mc_scalar_json(m.rc)},
                  {"reported",
                   {{"u_d2s_dba", round_up_tenth(m.d2s.stddev)},
                    {"u_lpas4m_dba", round_up_tenth(m.lpas4m.stddev)},
                    {"u_rc_m", round_up_tenth(m.rc.stddev)}}}};
    }

    json decay = json::array();
    for (std::size_t i = 0; i < p.fit.level_dba.size(); ++i) {
      decay.push_back({{"log2_r", p.fit.stats.log2_r[i]},
                       {"level_dba", p.fit.level_dba[i]},
                       {"fitted_dba", p.fit.level_dba[i] - p.fit.residual_db[i]},
                       {"residual_db", p.fit.residual_db[i]}});
    }
    jp["decay"] = std::move(decay);
    paths.push_back(std::move(jp));
  }
  j["paths"] = std::move(paths);

  if (report.area) {
    const auto& area = *report.area;
    j["area"] = {{"pool_mode", area.mode == PoolMode::kTotalVariance
                                   ? "total_variance"
                                   : "pooled_samples"},
                 {"two_path_warning", area.two_path_warning},
                 {"d2s", pooled_json(area.d2s)},
                 {"lpas4m", pooled_json(area.lpas4m)},
                 {"rc", pooled_json(area.rc)},
                 {"unicity_text", unicity_report(area).to_text()}};
  }
  return j.dump(2) + "\n";
}

std::string decay_points_csv(const AreaReport& report) {
  std::ostringstream os;
  os << "path_id,position_index,r_m,log2_r,level_dba,fitted_dba,residual_db\n";
  for (const auto& p : report.paths) {
    for (std::size_t i = 0; i < p.fit.level_dba.size(); ++i) {
      const double x = p.fit.stats.log2_r[i];
      os << p.path_id << ',' << i << ',' << format_double(std::exp2(x)) << ','
         << format_double(x) << ',' << format_double(p.fit.level_dba[i]) << ','
         << format_double(p.fit.level_dba[i] - p.fit.residual_db[i]) << ','
         << format_double(p.fit.residual_db[i]) << '\n';
    }
  }
  return os.str();
}

std::string intervals_csv(const AreaReport& report) {
  std::ostringstream os;
  os << "path_id,snq,center,u,expanded_u,lo,hi,method\n";
  auto row = [&](const std::string& id, const char* name, double center, double u,
                 const char* method) {
    const double half = report.coverage_k * u;
    os << id << ',' << name << ',' << format_double(center) << ',' << format_double(u)
       << ',' << format_double(half) << ',' << format_double(center - half) << ','
       << format_double(center + half) << ',' << method << '\n';
  };
  for (const auto& p : report.paths) {
    if (p.analytic) {
      row(p.path_id, "d2s", p.fit.snq.d2s_dba, p.analytic->budget.u_d2s_dba(), "analytic");
      row(p.path_id, "lpas4m", p.fit.snq.lpas4m_dba, p.analytic->budget.u_lpas4m_dba(),
          "analytic");
      row(p.path_id, "rc", p.fit.snq.rc_m, p.analytic->budget.u_rc_m(), "analytic");
    }
    if (p.mc) {
      row(p.path_id, "d2s", p.fit.snq.d2s_dba, p.mc->d2s.stddev, "mc");
      row(p.path_id, "lpas4m", p.fit.snq.lpas4m_dba, p.mc->lpas4m.stddev, "mc");
      row(p.path_id, "rc", p.fit.snq.rc_m, p.mc->rc.stddev, "mc");
    }
  }
  return os.str();
}

std::string histograms_csv(const AreaReport& report) {
  std::ostringstream os;
  os << "path_id,snq,bin_lo,bin_hi,count\n";
  auto rows = [&](const std::string& id, const char* name, const Histogram& h) {
    const double width = h.bin_width();
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      os << id << ',' << name << ',' << format_double(h.lo + width * i) << ','
         << format_double(h.lo + width * (i + 1)) << ',' << h.counts[i] << '\n';
    }
  };
  for (const auto& p : report.paths) {
    if (!p.mc) continue;
    rows(p.path_id, "d2s", p.mc->d2s.histogram);
    rows(p.path_id, "lpas4m", p.mc->lpas4m.histogram);
    rows(p.path_id, "rc", p.mc->rc.histogram);
  }
  return os.str();
}

}  // namespace snq
