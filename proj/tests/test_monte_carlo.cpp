#include <cmath>

#include <doctest.h>

#include "snq/errors.hpp"
#include "snq/field.hpp"
#include "snq/monte_carlo.hpp"
#include "snq/uncertainty.hpp"

using namespace snq;

namespace {

SynthOffice fixture() {
  OfficeConfigSpec spec;
  spec.d2s_dba = 5.0;
  spec.lpas4m_dba = 48.0;
  spec.rate_spread_db = 1.0;
  return synth_office(spec);
}

}  // namespace

TEST_CASE("offset sampler statistics at moderate draw counts") {
  McErrorModel model;
  StreamRng rng(2024, 0);
  const std::size_t n = 200000;
  std::size_t inside = 0;
  double sum = 0.0, sum2 = 0.0, dsum = 0.0, dsum2 = 0.0;
  const double baseline = 10000.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto offs = sample_position_offsets(rng, model, 2);
    sum += offs[0].dy_m;
    sum2 += offs[0].dy_m * offs[0].dy_m;
    if (std::abs(offs[0].dx_m) <= 0.1 && std::abs(offs[0].dy_m) <= 0.1) ++inside;
    const double d = std::hypot(baseline + offs[1].dx_m - offs[0].dx_m,
                                offs[1].dy_m - offs[0].dy_m) -
                     baseline;
    dsum += d;
    dsum2 += d * d;
  }
  const double dn = static_cast<double>(n);
  const double axis_sd = std::sqrt(sum2 / dn - (sum / dn) * (sum / dn));
  const double pair_sd = std::sqrt(dsum2 / dn - (dsum / dn) * (dsum / dn));

  CHECK(axis_sd == doctest::Approx(model.positioning_sigma_m).epsilon(0.02));
  CHECK(static_cast<double>(inside) / dn == doctest::Approx(0.95).epsilon(0.01));
  CHECK(pair_sd == doctest::Approx(0.0632).epsilon(0.02));
}

TEST_CASE("zero error magnitudes reproduce the nominal fit") {
  const auto synth = fixture();
  const McErrorModel zero = McErrorModel().scaled(0.0);
  StreamRng rng(5, 17);
  const SnqSet emulated = emulate_measurement(synth.field, synth.path, zero, rng);
  const SnqSet nominal = compute_snq(synth.path);
  CHECK(emulated.d2s_dba == doctest::Approx(nominal.d2s_dba).epsilon(1e-12));
  CHECK(emulated.lpas4m_dba == doctest::Approx(nominal.lpas4m_dba).epsilon(1e-12));
  CHECK(emulated.rc_m == doctest::Approx(nominal.rc_m).epsilon(1e-12));
}

TEST_CASE("identical seed and stream give identical emulations") {
  const auto synth = fixture();
  const McErrorModel model;
  StreamRng a(42, 3), b(42, 3);
  const SnqSet ra = emulate_measurement(synth.field, synth.path, model, a);
  const SnqSet rb = emulate_measurement(synth.field, synth.path, model, b);
  CHECK(ra.d2s_dba == rb.d2s_dba);
  CHECK(ra.lpas4m_dba == rb.lpas4m_dba);
  CHECK(ra.rc_m == rb.rc_m);

  StreamRng c(42, 4);
  const SnqSet rc = emulate_measurement(synth.field, synth.path, model, c);
  CHECK(ra.d2s_dba != rc.d2s_dba);
}

TEST_CASE("results are bit-identical regardless of the thread count") {
  const auto synth = fixture();
  const McErrorModel model;
  McConfig cfg;
  cfg.seed = 77;
  cfg.batch_size = 2000;
  cfg.max_batches = 2;
  cfg.min_runs = 4000;
  cfg.keep_samples = true;

  cfg.threads = 1;
  const McResult serial = run_mc(synth.field, synth.path, model, cfg);
  cfg.threads = 2;
  const McResult parallel = run_mc(synth.field, synth.path, model, cfg);
  cfg.threads = 5;
  const McResult odd = run_mc(synth.field, synth.path, model, cfg);

  REQUIRE(serial.samples_d2s.size() == parallel.samples_d2s.size());
  for (std::size_t i = 0; i < serial.samples_d2s.size(); ++i) {
    CHECK(serial.samples_d2s[i] == parallel.samples_d2s[i]);
    CHECK(serial.samples_d2s[i] == odd.samples_d2s[i]);
  }
  CHECK(serial.d2s.stddev == parallel.d2s.stddev);
  CHECK(serial.rc.stddev == odd.rc.stddev);
}

TEST_CASE("convergence with defaults settles within the first batches") {
  const auto synth = fixture();
  const McErrorModel model;
  McConfig cfg;
  cfg.seed = 3;
  const McResult result = run_mc(synth.field, synth.path, model, cfg);
  CHECK(result.converged);
  CHECK(result.converged_at_runs <= 20000);
  CHECK(result.runs_used <= 30000);
  CHECK(result.dropped_runs == 0);
  CHECK(result.d2s.normality.normal);
  CHECK(result.lpas4m.normality.normal);
  CHECK(result.rc.normality.normal);
  CHECK(result.d2s.histogram.counts.size() == cfg.histogram_bins);
}

TEST_CASE("moment-based normality screen") {
  StreamRng rng(8, 0);

  SUBCASE("normal samples pass") {
    std::vector<double> samples;
    for (int i = 0; i < 10000; ++i) samples.push_back(rng.normal(1.0));
    const auto check = check_normality(samples);
    CHECK(check.normal);
    CHECK(std::abs(check.skewness) < 0.1);
    CHECK(std::abs(check.excess_kurtosis) < 0.2);
  }

  SUBCASE("exponential samples fail on skewness") {
    std::vector<double> samples;
    for (int i = 0; i < 10000; ++i) {
      samples.push_back(-std::log(1.0 - rng.uniform01()));
    }
    const auto check = check_normality(samples);
    CHECK(!check.normal);
    CHECK(check.skewness == doctest::Approx(2.0).epsilon(0.2));
  }

  SUBCASE("constant samples are degenerate") {
    const std::vector<double> samples(2000, 3.25);
    const auto check = check_normality(samples);
    CHECK(!check.normal);
    CHECK(check.degenerate);
  }

  SUBCASE("too few samples throw") {
    const std::vector<double> samples(999, 0.0);
    CHECK_THROWS_AS((void)check_normality(samples), InsufficientSamplesError);
  }
}

TEST_CASE("MC uncertainties track the closed-form budget on a smooth field") {
  const auto synth = fixture();
  const McErrorModel model;  // coupling off: the closed-form assumption
  McConfig cfg;
  cfg.seed = 9;
  cfg.min_runs = 30000;
  cfg.max_batches = 4;
  const McResult mc = run_mc(synth.field, synth.path, model, cfg);

  const auto analytic =
      analytic_budget(synth.path, OctaveUncertaintyTable{}, DistanceErrorModel{});
  CHECK(std::abs(mc.d2s.stddev - analytic.budget.u_d2s_dba()) < 0.05);
  CHECK(std::abs(mc.lpas4m.stddev - analytic.budget.u_lpas4m_dba()) < 0.05);
  CHECK(std::abs(mc.rc.stddev - analytic.budget.u_rc_m()) < 0.1);
}

TEST_CASE("level errors only reproduce the homogeneous closed form") {
  // uniform band errors with a single present band give u_L = u_oct exactly
  MeasurementPath path;
  path.id = "hom";
  std::vector<double> r = {2, 4, 8, 16};
  for (std::size_t i = 0; i < r.size(); ++i) {
    path.positions.push_back(
        {r[i], OctaveSpectrum::single_band(3, 57.0 - 5.0 * std::log2(r[i] / 2.0)), ""});
  }
  const LogLinearField field = LogLinearField::from_path(path);

  McErrorModel model;
  model.positioning_sigma_m = 0.0;
  model.dist_model.u_tape_m = 0.0;
  McConfig cfg;
  cfg.seed = 123;
  cfg.min_runs = 50000;
  cfg.max_batches = 5;
  const McResult mc = run_mc(field, path, model, cfg);

  // closed form for homogeneous u_L = 0.8 (the 1 kHz row of the table)
  const auto analytic = analytic_budget(path, std::vector<double>(4, 0.8), 0.0);
  CHECK(std::abs(mc.lpas4m.stddev - analytic.budget.u_lpas4m_dba()) < 0.05);
  CHECK(std::abs(mc.d2s.stddev - analytic.budget.u_d2s_dba()) < 0.05);
}

TEST_CASE("distance errors alone leave the decay estimate unbiased") {
  const auto synth = fixture();
  McErrorModel model;
  for (auto& u : model.octave_table.u_oct_db) u = 0.0;
  model.positioning_sigma_m = 0.0;  // tape error only
  McConfig cfg;
  cfg.seed = 55;
  cfg.min_runs = 100000;
  cfg.max_batches = 10;
  const McResult mc = run_mc(synth.field, synth.path, model, cfg);
  const SnqSet truth = compute_snq(synth.path);
  CHECK(std::abs(mc.d2s.mean - truth.d2s_dba) < 0.02);
  CHECK(std::abs(mc.lpas4m.mean - truth.lpas4m_dba) < 0.02);
}

TEST_CASE("halving every error magnitude halves the MC uncertainties") {
  const auto synth = fixture();
  const McErrorModel model;
  const McErrorModel half = model.scaled(0.5);
  McConfig cfg;
  cfg.seed = 31;
  cfg.min_runs = 20000;
  cfg.max_batches = 2;
  const McResult full = run_mc(synth.field, synth.path, model, cfg);
  const McResult scaled = run_mc(synth.field, synth.path, half, cfg);

  CHECK(scaled.d2s.stddev / full.d2s.stddev == doctest::Approx(0.5).epsilon(0.05));
  CHECK(scaled.lpas4m.stddev / full.lpas4m.stddev == doctest::Approx(0.5).epsilon(0.05));
  CHECK(scaled.rc.stddev / full.rc.stddev == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("coupling to a perturbed grid raises the level uncertainty") {
  const auto synth = fixture();
  const std::vector<GridPerturbation> perts{{3, 3.0}};
  const auto grid = grid_from_loglinear(synth.field, perts);

  McErrorModel coupled;
  coupled.couple_levels_to_position = true;
  const McErrorModel detached;  // nominal levels: the step is invisible

  McConfig cfg;
  cfg.seed = 99;
  cfg.min_runs = 40000;
  cfg.max_batches = 4;
  const McResult on = run_mc(grid, synth.path, coupled, cfg);
  const McResult off = run_mc(grid, synth.path, detached, cfg);
  CHECK(on.lpas4m.stddev > off.lpas4m.stddev);
}

TEST_CASE("invalid configurations and mismatched fields are rejected") {
  const auto synth = fixture();
  const McErrorModel model;

  McConfig cfg;
  cfg.batch_size = 999;
  CHECK_THROWS_AS((void)run_mc(synth.field, synth.path, model, cfg),
                  std::invalid_argument);

  cfg = McConfig{};
  cfg.tol_level_db = 0.0;
  CHECK_THROWS_AS((void)run_mc(synth.field, synth.path, model, cfg),
                  std::invalid_argument);

  MeasurementPath other = synth.path;
  other.positions.pop_back();
  StreamRng rng(1, 1);
  CHECK_THROWS_AS((void)emulate_measurement(synth.field, other, model, rng),
                  FieldDomainError);
}
