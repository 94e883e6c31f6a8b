#include <cmath>

#include <doctest.h>
#include <json.hpp>

#include "snq/io.hpp"
#include "snq/metrics.hpp"
#include "support/oracles.hpp"

using namespace snq;

namespace {

const char* kCsvExample =
    "# format_version=1\n"
    "area_id,path_id,position_id,distance_m,L125,L250,L500,L1000,L2000,L4000,L8000\n"
    "office_a,P1,1,2,58.1,62.3,65,60.2,52.8,46.1,39\n"
    "office_a,P1,2,2.83,56.9,60.8,63.4,58.5,51,44.2,37\n"
    "office_a,P1,3,4,55.2,59.1,61.5,56.6,49,42.1,34.8\n"
    "office_a,P1,4,5.66,53.8,57.4,59.7,54.7,47.1,40.1,32.7\n"
    "office_a,P1,5,8,52.1,55.8,57.9,52.8,45.2,38,30.5\n"
    "office_a,P1,6,11.3,50.6,54.1,56.1,50.9,43.2,36.1,28.4\n"
    "office_a,P1,7,16,49,52.4,54.2,49,41.3,34,26.2\n";

bool areas_equal(const MeasurementArea& a, const MeasurementArea& b) {
  if (a.area_id != b.area_id || a.paths.size() != b.paths.size()) return false;
  for (std::size_t p = 0; p < a.paths.size(); ++p) {
    if (a.paths[p].id != b.paths[p].id) return false;
    if (a.paths[p].positions.size() != b.paths[p].positions.size()) return false;
    for (std::size_t i = 0; i < a.paths[p].positions.size(); ++i) {
      const auto& pa = a.paths[p].positions[i];
      const auto& pb = b.paths[p].positions[i];
      if (pa.id != pb.id || pa.distance_m != pb.distance_m) return false;
      for (std::size_t band = 0; band < kNumOctaveBands; ++band) {
        const double va = pa.spectrum.levels_db[band];
        const double vb = pb.spectrum.levels_db[band];
        if (va != vb && !(va == kAbsentBand && vb == kAbsentBand)) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("CSV measurement files parse into validated structures") {
  std::vector<Diagnostic> warnings;
  const auto area = parse_measurement(kCsvExample, FileFormat::kCsv, &warnings);
  CHECK(area.area_id == "office_a");
  REQUIRE(area.paths.size() == 1);
  REQUIRE(area.paths[0].positions.size() == 7);
  CHECK(area.paths[0].positions[0].distance_m == 2.0);
  CHECK(area.paths[0].positions[6].spectrum.levels_db[0] == 49.0);
  CHECK(warnings.empty());
}

TEST_CASE("CSV and JSON ingestion yield identical structures") {
  const auto from_csv = parse_measurement(kCsvExample, FileFormat::kCsv);
  const std::string json_text = write_measurement_json(from_csv);
  const auto from_json = parse_measurement(json_text, FileFormat::kJson);
  CHECK(areas_equal(from_csv, from_json));
}

TEST_CASE("measurement files round-trip exactly through both formats") {
  auto area = parse_measurement(kCsvExample, FileFormat::kCsv);
  // make the values less round and blank one band
  area.paths[0].positions[2].distance_m = 4.000000000001234;
  area.paths[0].positions[2].spectrum.levels_db[5] = kAbsentBand;
  area.paths[0].positions[4].spectrum.levels_db[1] = 55.800000000000004;

  const auto via_csv = parse_measurement(write_measurement_csv(area), FileFormat::kCsv);
  CHECK(areas_equal(area, via_csv));
  const auto via_json =
      parse_measurement(write_measurement_json(area), FileFormat::kJson);
  CHECK(areas_equal(area, via_json));
}

TEST_CASE("parse errors carry a location") {
  SUBCASE("six band columns") {
    const char* bad =
        "area_id,path_id,position_id,distance_m,L125,L250,L500,L1000,L2000,L4000\n";
    try {
      (void)parse_measurement(bad, FileFormat::kCsv);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("7 octave bands") != std::string::npos);
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("malformed number names line and field") {
    std::string bad(kCsvExample);
    const auto pos = bad.find("63.4");
    bad.replace(pos, 4, "abc");
    try {
      (void)parse_measurement(bad, FileFormat::kCsv);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
      CHECK(e.field() == "L500");
    }
  }
  SUBCASE("wrong column count in a data row") {
    std::string bad(kCsvExample);
    bad += "office_a,P1,8,17\n";
    CHECK_THROWS_AS((void)parse_measurement(bad, FileFormat::kCsv), ParseError);
  }
  SUBCASE("unsupported format version") {
    std::string bad(kCsvExample);
    bad.replace(bad.find("format_version=1"), 16, "format_version=9");
    CHECK_THROWS_AS((void)parse_measurement(bad, FileFormat::kCsv), ParseError);
  }
  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS((void)parse_measurement("{not json", FileFormat::kJson), ParseError);
  }
  SUBCASE("JSON with missing keys") {
    CHECK_THROWS_AS(
        (void)parse_measurement(R"({"format_version":1,"area_id":"x"})", FileFormat::kJson),
        ParseError);
  }
}

TEST_CASE("validation failures list structured diagnostics") {
  std::string bad(kCsvExample);
  bad.replace(bad.find("office_a,P1,1,2,"), 16, "office_a,P1,1,0,");
  try {
    (void)parse_measurement(bad, FileFormat::kCsv);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(!e.diagnostics().empty());
    bool found = false;
    for (const auto& d : e.diagnostics()) found |= d.code == "non_positive_distance";
    CHECK(found);
  }
}

TEST_CASE("path warnings surface without blocking") {
  std::string three_rows =
      "area_id,path_id,position_id,distance_m,L125,L250,L500,L1000,L2000,L4000,L8000\n"
      "a,P1,1,2,,,60,,,,\n"
      "a,P1,2,4,,,55,,,,\n"
      "a,P1,3,8,,,50,,,,\n";
  std::vector<Diagnostic> warnings;
  const auto area = parse_measurement(three_rows, FileFormat::kCsv, &warnings);
  CHECK(area.paths[0].positions[0].spectrum.bands_present() == 1);
  REQUIRE(!warnings.empty());
  CHECK(warnings[0].code == "few_positions");
}

TEST_CASE("run config parsing, defaults and invariants") {
  SUBCASE("defaults") {
    const auto cfg = parse_run_config("{}");
    CHECK(cfg.threshold_dba == 45.0);
    CHECK(cfg.coverage_k == 2.0);
    CHECK(cfg.octave_table.u_oct_db[6] == 1.8);
    CHECK(cfg.effective_u_r_m() == doctest::Approx(cfg.dist_model.u_r_total_m()));
  }
  SUBCASE("overrides and modes") {
    const auto cfg = parse_run_config(R"({
      "format_version": 1,
      "octave_uncertainty_db": [0.5,0.5,0.5,0.5,0.5,0.5,0.5],
      "u_tape_m": 0.02, "threshold_dba": 48, "coverage_k": 1.96,
      "u_r_mode": "tape_only",
      "override_u_level_db": 0.414, "override_u_r_m": 0.0,
      "mc": {"seed": 42, "batch_size": 2000, "min_runs": 6000, "threads": 2}
    })");
    CHECK(cfg.octave_table.u_oct_db[0] == 0.5);
    CHECK(cfg.threshold_dba == 48.0);
    CHECK(cfg.mc.seed == 42);
    CHECK(cfg.mc.batch_size == 2000);
    CHECK(cfg.mc.coverage_k == doctest::Approx(1.96));
    CHECK(cfg.effective_u_r_m() == 0.0);  // override wins

    const auto path = test::single_band_path({2, 4, 8}, {50, 45, 40});
    const auto u = cfg.effective_u_levels(path);
    REQUIRE(u.size() == 3);
    CHECK(u[0] == 0.414);

    RunConfig no_override = cfg;
    no_override.override_u_r_m.reset();
    CHECK(no_override.effective_u_r_m() == 0.02);  // tape-only mode
  }
  SUBCASE("invalid values are rejected") {
    CHECK_THROWS_AS((void)parse_run_config(R"({"octave_uncertainty_db":[0,1,1,1,1,1,1]})"),
                    ValidationError);
    CHECK_THROWS_AS((void)parse_run_config(R"({"mc":{"batch_size":10}})"), ValidationError);
    CHECK_THROWS_AS((void)parse_run_config(R"({"u_r_mode":"bogus"})"), ParseError);
    CHECK_THROWS_AS((void)parse_run_config("{oops"), ParseError);
  }
}

TEST_CASE("field files round-trip") {
  SUBCASE("log-linear with ripple and an absent band") {
    std::array<double, kNumOctaveBands> ref = {45, 52, 55, 50, 44, 38, kAbsentBand};
    std::array<double, kNumOctaveBands> rate = {3, 3.5, 4, 4.5, 5, 5.5, 0};
    std::vector<std::array<double, kNumOctaveBands>> ripple(
        3, std::array<double, kNumOctaveBands>{});
    ripple[1][2] = 0.75;
    const LogLinearField field({2, 4, 8}, ref, rate, ripple);

    const auto parsed = parse_field_json(write_field_json(field));
    REQUIRE(parsed->position_count() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(parsed->nominal_distance_m(i) == field.nominal_distance_m(i));
      for (std::size_t b = 0; b < kNumOctaveBands - 1; ++b) {
        CHECK(parsed->level_at(i, b, {}, {0.03, -0.02}) ==
              field.level_at(i, b, {}, {0.03, -0.02}));
      }
      CHECK(parsed->level_at(i, 6, {}, {}) == kAbsentBand);
    }
  }

  SUBCASE("grid") {
    std::array<double, kNumOctaveBands> ref{};
    ref.fill(50.0);
    std::array<double, kNumOctaveBands> rate{};
    rate.fill(5.0);
    const LogLinearField base({2, 4}, ref, rate);
    const std::vector<GridPerturbation> perts{{0, 2.0}};
    const GridField grid = grid_from_loglinear(base, perts);

    const auto parsed = parse_field_json(write_field_json(grid));
    REQUIRE(parsed->position_count() == 2);
    for (double sx : {-0.1, -0.05, 0.0, 0.08}) {
      CHECK(parsed->level_at(0, 3, {sx, 0.02}, {0.06, -0.09}) ==
            grid.level_at(0, 3, {sx, 0.02}, {0.06, -0.09}));
    }
  }

  SUBCASE("unknown kind is rejected") {
    CHECK_THROWS_AS((void)parse_field_json(R"({"format_version":1,"kind":"mystery"})"),
                    ParseError);
  }
}

TEST_CASE("report JSON retains raw numbers exactly") {
  const auto path = test::single_band_path({2, 4, 8, 16}, {57, 52, 47, 42});
  AreaReport report;
  report.area_id = "office_a";
  PathReport pr;
  pr.path_id = "P1";
  pr.fit = fit_path(path);
  pr.analytic = analytic_budget(path, std::vector<double>(4, 0.414), 0.0);
  report.paths.push_back(pr);

  const std::string text = write_report_json(report);
  const auto j = nlohmann::json::parse(text);
  CHECK(j["paths"][0]["snq"]["d2s_dba"].get<double>() == pr.fit.snq.d2s_dba);
  CHECK(j["paths"][0]["snq"]["rc_m"].get<double>() == pr.fit.snq.rc_m);
  CHECK(j["paths"][0]["analytic"]["u_d2s_dba"].get<double>() ==
        pr.analytic->budget.u_d2s_dba());
  CHECK(j["paths"][0]["analytic"]["terms"]["t3"].get<double>() == pr.analytic->terms.t3);
  CHECK(j["paths"][0]["analytic"]["split"]["rc"]["distance_var"].get<double>() ==
        pr.analytic->budget.rc.u2_dist);
  CHECK(j["paths"][0]["decay"][2]["residual_db"].get<double>() ==
        pr.fit.residual_db[2]);
  // reported values are rounded up to the next tenth
  CHECK(j["paths"][0]["analytic"]["reported"]["u_d2s_dba"].get<double>() == 0.2);
}

TEST_CASE("uncertainties report rounded up to the next one-tenth") {
  CHECK(round_up_tenth(0.185) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(round_up_tenth(0.41) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(round_up_tenth(0.4) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(round_up_tenth(1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(round_up_tenth(0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(round_up_tenth(0.301) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("format detection") {
  CHECK(detect_format("x.json", "") == FileFormat::kJson);
  CHECK(detect_format("x.csv", "") == FileFormat::kCsv);
  CHECK(detect_format("x.dat", "  {\"a\":1}") == FileFormat::kJson);
  CHECK(detect_format("x.dat", "a,b,c") == FileFormat::kCsv);
}

TEST_CASE("plot-data emitters produce one row per series point") {
  const auto path = test::single_band_path({2, 4, 8, 16}, {57, 52, 47, 42});
  AreaReport report;
  report.area_id = "a";
  PathReport pr;
  pr.path_id = "P1";
  pr.fit = fit_path(path);
  pr.analytic = analytic_budget(path, std::vector<double>(4, 0.414), 0.0);
  report.paths.push_back(pr);

  const std::string decay = decay_points_csv(report);
  CHECK(std::count(decay.begin(), decay.end(), '\n') == 5);  // header + 4 points
  const std::string intervals = intervals_csv(report);
  CHECK(std::count(intervals.begin(), intervals.end(), '\n') == 4);  // header + 3 SNQs
  CHECK(intervals.find("analytic") != std::string::npos);
}
