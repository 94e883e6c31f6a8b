// snq - spatial-decay single number quantities and their measurement
// uncertainty: regression metrics, closed-form budgets, Monte-Carlo
// measurement emulation and office-wide unicity analysis.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snq/area.hpp"
#include "snq/errors.hpp"
#include "snq/field.hpp"
#include "snq/io.hpp"
#include "snq/metrics.hpp"
#include "snq/monte_carlo.hpp"
#include "snq/uncertainty.hpp"

namespace {

namespace fs = std::filesystem;

int log_level() {
  const char* env = std::getenv("SNQ_LOG");
  if (!env) return 0;
  const std::string v(env);
  if (v == "2" || v == "debug") return 2;
  if (v == "1" || v == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "snq:info: %s\n", msg.c_str());
}

void print_warnings(const std::vector<snq::Diagnostic>& warnings) {
  for (const auto& w : warnings) {
    std::fprintf(stderr, "snq:warning: %s: %s\n", w.code.c_str(), w.message.c_str());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw snq::Error("cannot write file '" + path.string() + "'");
  out << content;
}

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<double> coverage_k;
  std::optional<double> threshold;
  std::string format = "csv";
  std::string couple;  // "on" / "off" / ""
  std::string u_r_mode;

  std::string input;
  std::string out;
  std::string out_dir;
  std::string field_path;
  bool with_mc = false;
  bool keep_samples = false;
  std::string method = "analytic";
  std::string pool = "total-variance";

  // synth
  std::string label;
  std::optional<double> d2s;
  std::optional<double> lpas4m;
  std::optional<double> rc;
  double rate_spread = 0.0;
  double ripple = 0.0;
  std::size_t positions = 7;
  double r_first = 2.0;
  double r_last = 8.0;
  std::string area_id = "synthetic";
  std::string out_measurement;
  std::string out_field;
};

snq::RunConfig load_config(const Options& opt) {
  snq::RunConfig cfg;
  if (!opt.config_path.empty()) cfg = snq::load_run_config(opt.config_path);
  if (opt.seed) cfg.mc.seed = *opt.seed;
  if (opt.runs) cfg.mc.min_runs = *opt.runs;
  if (opt.coverage_k) {
    cfg.coverage_k = *opt.coverage_k;
    cfg.mc.coverage_k = *opt.coverage_k;
  }
  if (opt.threshold) cfg.threshold_dba = *opt.threshold;
  if (opt.couple == "on") cfg.couple_levels_to_position = true;
  if (opt.couple == "off") cfg.couple_levels_to_position = false;
  if (opt.u_r_mode == "combined") cfg.u_r_mode = snq::RunConfig::URMode::kCombined;
  if (opt.u_r_mode == "tape_only") cfg.u_r_mode = snq::RunConfig::URMode::kTapeOnly;
  return cfg;
}

snq::McErrorModel mc_model_from(const snq::RunConfig& cfg) {
  snq::McErrorModel model;
  model.octave_table = cfg.octave_table;
  model.dist_model = cfg.dist_model;
  model.positioning_sigma_m = cfg.dist_model.positioning_sigma_m();
  model.couple_levels_to_position = cfg.couple_levels_to_position;
  return model;
}

// One field per path: an explicit file (single-path areas only) or a
// log-linear reconstruction of each measured path.
std::vector<std::unique_ptr<snq::FieldProvider>> fields_for(
    const snq::MeasurementArea& area, const Options& opt) {
  std::vector<std::unique_ptr<snq::FieldProvider>> fields;
  if (!opt.field_path.empty()) {
    if (area.paths.size() != 1) {
      throw snq::Error("--field applies to single-path files; this one has " +
                       std::to_string(area.paths.size()) + " paths");
    }
    fields.push_back(snq::load_field(opt.field_path));
  } else {
    log_info("no field file given; reconstructing a log-linear field per path");
    for (const auto& path : area.paths) {
      fields.push_back(std::make_unique<snq::LogLinearField>(
          snq::LogLinearField::from_path(path)));
    }
  }
  return fields;
}

void maybe_write_report(const Options& opt, const snq::AreaReport& report) {
  if (!opt.out.empty()) {
    write_file(opt.out, snq::write_report_json(report));
    log_info("wrote " + opt.out);
  }
}

int cmd_compute(const Options& opt) {
  std::vector<snq::Diagnostic> warnings;
  const auto area = snq::load_measurement(opt.input, &warnings);
  print_warnings(warnings);
  const snq::RunConfig cfg = load_config(opt);

  snq::AreaReport report{area.area_id, cfg.threshold_dba, cfg.coverage_k, {}, {}};
  for (const auto& path : area.paths) {
    auto fit = snq::fit_path(path, cfg.threshold_dba);
    std::printf("%s: D2S = %.2f dB(A)  LpAS4m = %.2f dB(A)  rc = %.2f m  (N=%zu)\n",
                path.id.c_str(), fit.snq.d2s_dba, fit.snq.lpas4m_dba, fit.snq.rc_m,
                path.positions.size());
    report.paths.push_back({path.id, std::move(fit), std::nullopt, std::nullopt});
  }
  maybe_write_report(opt, report);
  return 0;
}

int cmd_uncertainty(const Options& opt) {
  std::vector<snq::Diagnostic> warnings;
  const auto area = snq::load_measurement(opt.input, &warnings);
  print_warnings(warnings);
  const snq::RunConfig cfg = load_config(opt);

  snq::AreaReport report{area.area_id, cfg.threshold_dba, cfg.coverage_k, {}, {}};
  for (const auto& path : area.paths) {
    auto fit = snq::fit_path(path, cfg.threshold_dba);
    auto budget = snq::analytic_budget(path, cfg.effective_u_levels(path),
                                       cfg.effective_u_r_m(), cfg.threshold_dba);
    const auto& b = budget.budget;
    std::printf(
        "%s: u(D2S) = %.3f dB(A) [reported %.1f]  u(LpAS4m) = %.3f dB(A) "
        "[reported %.1f]  u(rc) = %.3f m [reported %.1f]\n",
        path.id.c_str(), b.u_d2s_dba(), snq::round_up_tenth(b.u_d2s_dba()),
        b.u_lpas4m_dba(), snq::round_up_tenth(b.u_lpas4m_dba()), b.u_rc_m(),
        snq::round_up_tenth(b.u_rc_m()));
    if (log_level() >= 1) {
      std::printf("    variance split level/distance: D2S %.3g/%.3g  LpAS4m %.3g/%.3g"
                  "  rc %.3g/%.3g  (u_r = %.4f m)\n",
                  b.d2s.u2_level, b.d2s.u2_dist, b.lpas4m.u2_level, b.lpas4m.u2_dist,
                  b.rc.u2_level, b.rc.u2_dist, budget.u_r_m);
    }
    report.paths.push_back({path.id, std::move(fit), std::move(budget), std::nullopt});
  }
  maybe_write_report(opt, report);
  return 0;
}

int cmd_mc(const Options& opt) {
  std::vector<snq::Diagnostic> warnings;
  const auto area = snq::load_measurement(opt.input, &warnings);
  print_warnings(warnings);
  const snq::RunConfig cfg = load_config(opt);

  const auto fields = fields_for(area, opt);
  const auto model = mc_model_from(cfg);
  snq::McConfig mc_cfg = cfg.mc;
  if (opt.keep_samples) mc_cfg.keep_samples = true;

  snq::AreaReport report{area.area_id, cfg.threshold_dba, cfg.coverage_k, {}, {}};
  for (std::size_t i = 0; i < area.paths.size(); ++i) {
    const auto& path = area.paths[i];
    auto fit = snq::fit_path(path, cfg.threshold_dba);
    auto mc = snq::run_mc(*fields[i], path, model, mc_cfg, cfg.threshold_dba);
    std::printf(
        "%s: D2S = %.3f +- %.3f dB(A)  LpAS4m = %.3f +- %.3f dB(A)  rc = %.3f +- %.3f m\n",
        path.id.c_str(), mc.d2s.mean, mc.d2s.stddev, mc.lpas4m.mean, mc.lpas4m.stddev,
        mc.rc.mean, mc.rc.stddev);
    std::printf("    runs = %zu, %s (stable from %zu runs), normality %s/%s/%s\n",
                mc.runs_used, mc.converged ? "converged" : "NOT converged",
                mc.converged_at_runs, mc.d2s.normality.normal ? "ok" : "FAIL",
                mc.lpas4m.normality.normal ? "ok" : "FAIL",
                mc.rc.normality.normal ? "ok" : "FAIL");
    report.paths.push_back({path.id, std::move(fit), std::nullopt, std::move(mc)});
  }
  maybe_write_report(opt, report);
  return 0;
}

int cmd_area(const Options& opt) {
  std::vector<snq::Diagnostic> warnings;
  const auto area = snq::load_measurement(opt.input, &warnings);
  print_warnings(warnings);
  const snq::RunConfig cfg = load_config(opt);

  const bool use_mc = opt.method == "mc";
  const snq::PoolMode mode = opt.pool == "samples" ? snq::PoolMode::kPooledSamples
                                                   : snq::PoolMode::kTotalVariance;

  snq::AreaReport report{area.area_id, cfg.threshold_dba, cfg.coverage_k, {}, {}};
  std::vector<snq::PathResult> results;
  std::vector<std::unique_ptr<snq::FieldProvider>> fields;
  snq::McConfig mc_cfg = cfg.mc;
  if (use_mc) {
    fields = fields_for(area, opt);
    mc_cfg.keep_samples = mode == snq::PoolMode::kPooledSamples || mc_cfg.keep_samples;
  }

  for (std::size_t i = 0; i < area.paths.size(); ++i) {
    const auto& path = area.paths[i];
    auto fit = snq::fit_path(path, cfg.threshold_dba);
    snq::PathReport path_report{path.id, fit, std::nullopt, std::nullopt};
    if (use_mc) {
      auto model = mc_model_from(cfg);
      auto mc = snq::run_mc(*fields[i], path, model, mc_cfg, cfg.threshold_dba);
      results.push_back(snq::PathResult::from_mc(path.id, fit.snq, mc));
      results.back().coverage_k = cfg.coverage_k;
      path_report.mc = std::move(mc);
    } else {
      auto budget = snq::analytic_budget(path, cfg.effective_u_levels(path),
                                         cfg.effective_u_r_m(), cfg.threshold_dba);
      results.push_back(
          snq::PathResult::from_analytic(path.id, fit.snq, budget.budget, cfg.coverage_k));
      path_report.analytic = std::move(budget);
    }
    report.paths.push_back(std::move(path_report));
  }

  auto pooled = snq::pool_area(std::move(results), mode);
  std::fputs(snq::unicity_report(pooled).to_text().c_str(), stdout);
  report.area = std::move(pooled);
  maybe_write_report(opt, report);
  return 0;
}

int cmd_synth(const Options& opt) {
  const snq::RunConfig cfg = load_config(opt);

  snq::OfficeConfigSpec spec;
  if (!opt.label.empty()) {
    spec = snq::OfficeConfigSpec::from_label(opt.label);
  } else if (opt.d2s && opt.lpas4m) {
    spec.d2s_dba = *opt.d2s;
    spec.lpas4m_dba = *opt.lpas4m;
  } else {
    throw snq::Error("synth needs --label or both --d2s and --lpas4m");
  }
  spec.rate_spread_db = opt.rate_spread;
  spec.ripple_db = opt.ripple;
  if (opt.rc) spec.expected_rc_m = *opt.rc;

  const auto geometry = snq::PathGeometry::log_spaced(opt.r_first, opt.r_last, opt.positions);
  auto synth = snq::synth_office(spec, geometry, cfg.threshold_dba);
  const auto fit = snq::fit_path(synth.path, cfg.threshold_dba);
  std::printf("synth%s%s: D2S = %.2f dB(A)  LpAS4m = %.2f dB(A)  rc = %.2f m\n",
              opt.label.empty() ? "" : " ", opt.label.c_str(), fit.snq.d2s_dba,
              fit.snq.lpas4m_dba, fit.snq.rc_m);

  snq::MeasurementArea area;
  area.area_id = opt.area_id;
  area.paths.push_back(synth.path);
  if (!opt.out_measurement.empty()) {
    const bool json = opt.format == "json";
    write_file(opt.out_measurement, json ? snq::write_measurement_json(area)
                                         : snq::write_measurement_csv(area));
    log_info("wrote " + opt.out_measurement);
  }
  if (!opt.out_field.empty()) {
    write_file(opt.out_field, snq::write_field_json(synth.field));
    log_info("wrote " + opt.out_field);
  }
  return 0;
}

int cmd_report(const Options& opt) {
  std::vector<snq::Diagnostic> warnings;
  const auto area = snq::load_measurement(opt.input, &warnings);
  print_warnings(warnings);
  const snq::RunConfig cfg = load_config(opt);

  std::vector<std::unique_ptr<snq::FieldProvider>> fields;
  snq::McConfig mc_cfg = cfg.mc;
  if (opt.with_mc) fields = fields_for(area, opt);

  snq::AreaReport report{area.area_id, cfg.threshold_dba, cfg.coverage_k, {}, {}};
  std::vector<snq::PathResult> results;
  for (std::size_t i = 0; i < area.paths.size(); ++i) {
    const auto& path = area.paths[i];
    auto fit = snq::fit_path(path, cfg.threshold_dba);
    auto budget = snq::analytic_budget(path, cfg.effective_u_levels(path),
                                       cfg.effective_u_r_m(), cfg.threshold_dba);
    results.push_back(
        snq::PathResult::from_analytic(path.id, fit.snq, budget.budget, cfg.coverage_k));
    snq::PathReport path_report{path.id, std::move(fit), std::move(budget), std::nullopt};
    if (opt.with_mc) {
      auto model = mc_model_from(cfg);
      path_report.mc =
          snq::run_mc(*fields[i], path, model, mc_cfg, cfg.threshold_dba);
    }
    report.paths.push_back(std::move(path_report));
  }
  if (area.paths.size() >= 2) {
    report.area = snq::pool_area(std::move(results));
  }

  const fs::path dir = opt.out_dir.empty() ? fs::path(".") : fs::path(opt.out_dir);
  fs::create_directories(dir);
  write_file(dir / "report.json", snq::write_report_json(report));
  write_file(dir / "decay_points.csv", snq::decay_points_csv(report));
  write_file(dir / "intervals.csv", snq::intervals_csv(report));
  if (opt.with_mc) write_file(dir / "histograms.csv", snq::histograms_csv(report));
  std::printf("report written to %s\n", dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial-decay SNQs (D2S, LpAS4m, rc) and their measurement uncertainty"};
  app.require_subcommand(1);
  Options opt;

  app.add_option("--config,-c", opt.config_path, "run configuration JSON file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "Monte-Carlo seed (64-bit)");
  app.add_option("--runs", opt.runs, "minimum Monte-Carlo runs");
  app.add_option("--coverage-k", opt.coverage_k, "coverage factor for 95% intervals");
  app.add_option("--threshold", opt.threshold, "comfort threshold in dB(A)");
  app.add_option("--format", opt.format, "output format for generated measurements")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--couple-positioning", opt.couple,
                 "query fields at displaced positions in the emulation")
      ->check(CLI::IsMember({"on", "off"}));

  auto* compute = app.add_subcommand("compute", "SNQs per measurement path");
  compute->add_option("input", opt.input, "measurement file (CSV or JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  compute->add_option("--out", opt.out, "write a JSON report");

  auto* uncertainty =
      app.add_subcommand("uncertainty", "closed-form uncertainty budgets per path");
  uncertainty->add_option("input", opt.input)->required()->check(CLI::ExistingFile);
  uncertainty->add_option("--out", opt.out, "write a JSON report");
  uncertainty->add_option("--u-r-mode", opt.u_r_mode,
                          "distance uncertainty entering the budget")
      ->check(CLI::IsMember({"combined", "tape_only"}));

  auto* mc = app.add_subcommand("mc", "Monte-Carlo measurement emulation per path");
  mc->add_option("input", opt.input)->required()->check(CLI::ExistingFile);
  mc->add_option("--field", opt.field_path, "field file (single-path inputs)")
      ->check(CLI::ExistingFile);
  mc->add_flag("--keep-samples", opt.keep_samples, "retain raw samples in the report");
  mc->add_option("--out", opt.out, "write a JSON report");

  auto* area_cmd = app.add_subcommand("area", "pooled office-wide uncertainty and unicity");
  area_cmd->add_option("input", opt.input)->required()->check(CLI::ExistingFile);
  area_cmd->add_option("--method", opt.method, "per-path uncertainty method")
      ->check(CLI::IsMember({"analytic", "mc"}));
  area_cmd->add_option("--pool", opt.pool, "office-wide pooling rule")
      ->check(CLI::IsMember({"total-variance", "samples"}));
  area_cmd->add_option("--field", opt.field_path)->check(CLI::ExistingFile);
  area_cmd->add_option("--out", opt.out, "write a JSON report");

  auto* synth = app.add_subcommand("synth", "generate a synthetic office measurement");
  synth->add_option("--label", opt.label, "configuration label, e.g. 312");
  synth->add_option("--d2s", opt.d2s, "target D2S in dB(A)");
  synth->add_option("--lpas4m", opt.lpas4m, "target LpAS4m in dB(A)");
  synth->add_option("--rc", opt.rc, "expected rc (consistency check)");
  synth->add_option("--rate-spread", opt.rate_spread, "per-band decay tilt in dB");
  synth->add_option("--ripple", opt.ripple, "residual ripple amplitude in dB");
  synth->add_option("--positions", opt.positions, "number of positions");
  synth->add_option("--r-first", opt.r_first, "first distance in m");
  synth->add_option("--r-last", opt.r_last, "last distance in m");
  synth->add_option("--area-id", opt.area_id, "area id for the generated file");
  synth->add_option("--out-measurement", opt.out_measurement, "measurement file to write");
  synth->add_option("--out-field", opt.out_field, "field JSON to write");

  auto* report = app.add_subcommand("report", "combined JSON report and plot data");
  report->add_option("input", opt.input)->required()->check(CLI::ExistingFile);
  report->add_flag("--mc", opt.with_mc, "include a Monte-Carlo run per path");
  report->add_option("--field", opt.field_path)->check(CLI::ExistingFile);
  report->add_option("--out-dir", opt.out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (compute->parsed()) return cmd_compute(opt);
    if (uncertainty->parsed()) return cmd_uncertainty(opt);
    if (mc->parsed()) return cmd_mc(opt);
    if (area_cmd->parsed()) return cmd_area(opt);
    if (synth->parsed()) return cmd_synth(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const snq::ParseError& e) {
    std::fprintf(stderr, "snq:error:parse: %s", e.what());
    if (e.line() != 0) std::fprintf(stderr, " (line %zu", e.line());
    if (e.line() != 0 && !e.field().empty()) std::fprintf(stderr, ", field %s", e.field().c_str());
    if (e.line() != 0) std::fprintf(stderr, ")");
    std::fprintf(stderr, "\n");
    return 2;
  } catch (const snq::ValidationError& e) {
    std::fprintf(stderr, "snq:error:validation: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "snq:error:runtime: %s\n", e.what());
    return 1;
  }
  return 0;
}
