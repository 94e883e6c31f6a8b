#include "snq/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "snq/errors.hpp"

namespace snq {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

void check_field_covers_path(const FieldProvider& field, const MeasurementPath& path) {
  if (field.position_count() != path.positions.size()) {
    throw FieldDomainError("field and path position counts differ");
  }
  for (std::size_t i = 0; i < path.positions.size(); ++i) {
    const double fr = field.nominal_distance_m(i);
    const double pr = path.positions[i].distance_m;
    if (std::abs(fr - pr) > 1e-9 * std::max(1.0, std::abs(pr))) {
      throw FieldDomainError("field nominal distances do not match the path");
    }
  }
}

Histogram build_histogram(std::span<const double> samples, std::size_t bins) {
  Histogram h;
  if (samples.empty() || bins == 0) return h;
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  h.lo = *lo_it;
  h.hi = *hi_it;
  h.counts.assign(bins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (double v : samples) {
    std::size_t bin = 0;
    if (width > 0.0) {
      bin = std::min(bins - 1, static_cast<std::size_t>((v - h.lo) / width));
    }
    ++h.counts[bin];
  }
  return h;
}

// Running population moments, updated in run order so results do not depend
// on the thread count.
struct Welford {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  double stddev() const {
    return count == 0 ? 0.0 : std::sqrt(m2 / static_cast<double>(count));
  }
};

}  // namespace

McErrorModel McErrorModel::scaled(double factor) const {
  McErrorModel m = *this;
  for (auto& u : m.octave_table.u_oct_db) u *= factor;
  m.dist_model.u_tape_m *= factor;
  m.dist_model.square_side_m *= factor;  // the derived sigma tracks the side
  m.positioning_sigma_m *= factor;
  return m;
}

std::vector<Offset2> sample_position_offsets(StreamRng& rng, const McErrorModel& model,
                                             std::size_t n_devices) {
  if (!(model.positioning_sigma_m >= 0.0)) {
    throw std::invalid_argument("positioning sigma must be >= 0");
  }
  std::vector<Offset2> out;
  out.reserve(n_devices);
  for (std::size_t i = 0; i < n_devices; ++i) {
    const double dx = rng.normal(model.positioning_sigma_m);
    const double dy = rng.normal(model.positioning_sigma_m);
    out.push_back({dx, dy});
  }
  return out;
}

SnqSet emulate_measurement(const FieldProvider& field, const MeasurementPath& path,
                           const McErrorModel& model, StreamRng& rng,
                           double threshold_dba) {
  check_field_covers_path(field, path);
  const std::size_t n = path.positions.size();
  const Offset2 zero{};

  const auto offsets = sample_position_offsets(rng, model, 1 + n);
  const Offset2& source = offsets[0];

  MeasurementPath perturbed;
  perturbed.id = path.id;
  perturbed.positions.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Offset2& receiver = offsets[1 + i];
    const double r = path.positions[i].distance_m;
    const double true_dist = std::hypot(r + receiver.dx_m - source.dx_m,
                                        receiver.dy_m - source.dy_m);

    OctaveSpectrum spectrum = model.couple_levels_to_position
                                  ? field.spectrum_at(i, source, receiver)
                                  : field.spectrum_at(i, zero, zero);
    for (std::size_t b = 0; b < kNumOctaveBands; ++b) {
      const double err = rng.uniform_pm(model.octave_table.u_oct_db[b] * kSqrt3);
      if (spectrum.band_present(b)) spectrum.levels_db[b] += err;
    }

    const double measured = true_dist + rng.normal(model.dist_model.u_tape_m);
    perturbed.positions[i].distance_m = std::max(measured, 1e-3);
    perturbed.positions[i].spectrum = spectrum;
  }

  // an emulated fit may sit arbitrarily close to zero decay; let the caller
  // decide what to do with extreme draws
  return compute_snq(perturbed, threshold_dba, 1e-12);
}

NormalityCheck check_normality(std::span<const double> samples) {
  if (samples.size() < 1000) {
    throw InsufficientSamplesError("normality check needs at least 1000 samples");
  }
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  NormalityCheck check;
  if (!(m2 > 0.0) || !std::isfinite(m2)) {
    check.degenerate = true;
    check.normal = false;
    return check;
  }
  check.skewness = m3 / std::pow(m2, 1.5);
  check.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  check.normal = std::abs(check.skewness) < kSkewnessLimit &&
                 std::abs(check.excess_kurtosis) < kExcessKurtosisLimit;
  return check;
}

McResult run_mc(const FieldProvider& field, const MeasurementPath& path,
                const McErrorModel& model, const McConfig& config,
                double threshold_dba) {
  if (config.batch_size < 1000) {
    throw std::invalid_argument("batch_size must be at least 1000");
  }
  if (!(config.tol_level_db > 0.0) || !(config.tol_rc_m > 0.0)) {
    throw std::invalid_argument("convergence tolerances must be positive");
  }
  check_field_covers_path(field, path);

  unsigned threads = config.threads;
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }

  McResult result;
  result.coverage_k = config.coverage_k;

  std::vector<double> d2s, l4, rc;  // finite samples, in run order
  Welford w_d2s, w_l4, w_rc;
  double prev_d2s = 0.0, prev_l4 = 0.0, prev_rc = 0.0;
  bool have_prev = false;
  std::size_t prev_runs = 0;

  std::vector<SnqSet> batch(config.batch_size);
  std::size_t runs = 0;

  for (std::size_t b = 0; b < config.max_batches && !result.converged; ++b) {
    const std::size_t batch_begin = runs;

    auto worker = [&](std::size_t lo, std::size_t hi, std::exception_ptr& err) {
      try {
        for (std::size_t j = lo; j < hi; ++j) {
          StreamRng rng(config.seed, batch_begin + j);
          batch[j] = emulate_measurement(field, path, model, rng, threshold_dba);
        }
      } catch (...) {
        err = std::current_exception();
      }
    };

    if (threads <= 1) {
      std::exception_ptr err;
      worker(0, config.batch_size, err);
      if (err) std::rethrow_exception(err);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errs(threads);
      const std::size_t chunk = (config.batch_size + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = std::min<std::size_t>(t * chunk, config.batch_size);
        const std::size_t hi = std::min<std::size_t>(lo + chunk, config.batch_size);
        pool.emplace_back(worker, lo, hi, std::ref(errs[t]));
      }
      for (auto& th : pool) th.join();
      for (auto& err : errs) {
        if (err) std::rethrow_exception(err);
      }
    }

    // aggregate strictly in run order
    for (std::size_t j = 0; j < config.batch_size; ++j) {
      const SnqSet& s = batch[j];
      if (!std::isfinite(s.d2s_dba) || !std::isfinite(s.lpas4m_dba) ||
          !std::isfinite(s.rc_m)) {
        ++result.dropped_runs;
        continue;
      }
      d2s.push_back(s.d2s_dba);
      l4.push_back(s.lpas4m_dba);
      rc.push_back(s.rc_m);
      w_d2s.add(s.d2s_dba);
      w_l4.add(s.lpas4m_dba);
      w_rc.add(s.rc_m);
    }
    runs += config.batch_size;

    const double sd_d2s = w_d2s.stddev();
    const double sd_l4 = w_l4.stddev();
    const double sd_rc = w_rc.stddev();
    if (have_prev && runs >= config.min_runs &&
        std::abs(sd_d2s - prev_d2s) < config.tol_level_db &&
        std::abs(sd_l4 - prev_l4) < config.tol_level_db &&
        std::abs(sd_rc - prev_rc) < config.tol_rc_m) {
      result.converged = true;
      result.converged_at_runs = prev_runs;
    }
    prev_d2s = sd_d2s;
    prev_l4 = sd_l4;
    prev_rc = sd_rc;
    have_prev = true;
    prev_runs = runs;
  }

  result.runs_used = runs;
  result.d2s.mean = w_d2s.mean;
  result.d2s.stddev = w_d2s.stddev();
  result.lpas4m.mean = w_l4.mean;
  result.lpas4m.stddev = w_l4.stddev();
  result.rc.mean = w_rc.mean;
  result.rc.stddev = w_rc.stddev();

  result.d2s.histogram = build_histogram(d2s, config.histogram_bins);
  result.lpas4m.histogram = build_histogram(l4, config.histogram_bins);
  result.rc.histogram = build_histogram(rc, config.histogram_bins);
  if (d2s.size() >= 1000) {
    result.d2s.normality = check_normality(d2s);
    result.lpas4m.normality = check_normality(l4);
    result.rc.normality = check_normality(rc);
  }

  if (config.keep_samples) {
    result.samples_d2s = std::move(d2s);
    result.samples_lpas4m = std::move(l4);
    result.samples_rc = std::move(rc);
  }
  return result;
}

}  // namespace snq
