#include "snq/area.hpp"

#include <cmath>
#include <sstream>

#include "snq/errors.hpp"
#include "stats_util.hpp"

namespace snq {

bool overlap_test(const Interval& a, const Interval& b) {
  return a.lo() <= b.hi() && b.lo() <= a.hi();
}

PathResult PathResult::from_analytic(const std::string& id, const SnqSet& snq,
                                     const UncertaintyBudget& budget, double coverage_k) {
  PathResult r;
  r.path_id = id;
  r.snq = snq;
  r.u_d2s_dba = budget.u_d2s_dba();
  r.u_lpas4m_dba = budget.u_lpas4m_dba();
  r.u_rc_m = budget.u_rc_m();
  r.source = UncertaintySource::kAnalytic;
  r.coverage_k = coverage_k;
  return r;
}

PathResult PathResult::from_mc(const std::string& id, const SnqSet& snq,
                               const McResult& mc) {
  PathResult r;
  r.path_id = id;
  r.snq = snq;
  r.u_d2s_dba = mc.d2s.stddev;
  r.u_lpas4m_dba = mc.lpas4m.stddev;
  r.u_rc_m = mc.rc.stddev;
  r.source = UncertaintySource::kMonteCarlo;
  r.coverage_k = mc.coverage_k;
  r.samples_d2s = mc.samples_d2s;
  r.samples_lpas4m = mc.samples_lpas4m;
  r.samples_rc = mc.samples_rc;
  return r;
}

namespace {

struct SnqView {
  double center;
  double u;
  const std::vector<double>* samples;
};

PooledSnq pool_one(const std::vector<PathResult>& paths,
                   const std::vector<SnqView>& views, PoolMode mode, double k) {
  const std::size_t p = paths.size();
  PooledSnq out;

  std::vector<double> means(p), u2(p);
  for (std::size_t i = 0; i < p; ++i) {
    means[i] = views[i].center;
    u2[i] = views[i].u * views[i].u;
  }
  out.between_var = detail::variance(means);
  out.mean_within_var = detail::mean(u2);

  if (mode == PoolMode::kTotalVariance) {
    out.pooled_mean = detail::mean(means);
    out.pooled_u = std::sqrt(out.between_var + out.mean_within_var);
  } else {
    // spread of the raw samples pooled across paths
    std::size_t total = 0;
    double sum = 0.0;
    for (const auto& v : views) {
      total += v.samples->size();
      for (double s : *v.samples) sum += s;
    }
    if (total == 0) {
      throw InsufficientPathsError("pooled-sample mode requires MC samples on every path");
    }
    out.pooled_mean = sum / static_cast<double>(total);
    double ss = 0.0;
    for (const auto& v : views) {
      for (double s : *v.samples) {
        const double d = s - out.pooled_mean;
        ss += d * d;
      }
    }
    out.pooled_u = std::sqrt(ss / static_cast<double>(total));
  }

  out.overlap.assign(p, std::vector<bool>(p, true));
  out.unique_value_ok = true;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const Interval a{views[i].center, k * views[i].u};
      const Interval b{views[j].center, k * views[j].u};
      const bool ov = overlap_test(a, b);
      out.overlap[i][j] = ov;
      out.overlap[j][i] = ov;
      if (!ov) out.unique_value_ok = false;
    }
  }
  return out;
}

}  // namespace

AreaResult pool_area(std::vector<PathResult> paths, PoolMode mode) {
  if (paths.size() < 2) {
    throw InsufficientPathsError("area pooling needs at least 2 paths");
  }
  if (mode == PoolMode::kPooledSamples) {
    for (const auto& p : paths) {
      if (p.samples_d2s.empty() || p.samples_lpas4m.empty() || p.samples_rc.empty()) {
        throw InsufficientPathsError(
            "pooled-sample mode requires MC samples on every path");
      }
    }
  }

  AreaResult area;
  area.mode = mode;
  area.coverage_k = paths.front().coverage_k;
  area.two_path_warning = paths.size() == 2;

  std::vector<SnqView> d2s_views, l4_views, rc_views;
  for (const auto& p : paths) {
    d2s_views.push_back({p.snq.d2s_dba, p.u_d2s_dba, &p.samples_d2s});
    l4_views.push_back({p.snq.lpas4m_dba, p.u_lpas4m_dba, &p.samples_lpas4m});
    rc_views.push_back({p.snq.rc_m, p.u_rc_m, &p.samples_rc});
  }
  area.d2s = pool_one(paths, d2s_views, mode, area.coverage_k);
  area.lpas4m = pool_one(paths, l4_views, mode, area.coverage_k);
  area.rc = pool_one(paths, rc_views, mode, area.coverage_k);
  area.paths = std::move(paths);
  return area;
}

UnicityReport unicity_report(const AreaResult& area) {
  UnicityReport report;
  report.coverage_k = area.coverage_k;
  report.two_path_warning = area.two_path_warning;

  auto verdict = [&](const char* name, const PooledSnq& pooled) {
    UnicityVerdict v;
    v.snq_name = name;
    v.unique_value_ok = pooled.unique_value_ok;
    v.pooled_value = pooled.pooled_mean;
    v.pooled_u = pooled.pooled_u;
    v.expanded_u = area.coverage_k * pooled.pooled_u;
    for (std::size_t i = 0; i < pooled.overlap.size(); ++i) {
      for (std::size_t j = i + 1; j < pooled.overlap.size(); ++j) {
        if (!pooled.overlap[i][j]) v.disjoint_pairs.emplace_back(i, j);
      }
    }
    return v;
  };
  report.verdicts.push_back(verdict("D2S", area.d2s));
  report.verdicts.push_back(verdict("LpAS4m", area.lpas4m));
  report.verdicts.push_back(verdict("rc", area.rc));
  return report;
}

std::string UnicityReport::to_text() const {
  std::ostringstream os;
  for (const auto& v : verdicts) {
    os << v.snq_name << ": pooled " << v.pooled_value << " +- " << v.expanded_u
       << " (k=" << coverage_k << "); single value "
       << (v.unique_value_ok ? "defensible" : "questionable");
    if (!v.disjoint_pairs.empty()) {
      os << "; disjoint path pairs:";
      for (const auto& [i, j] : v.disjoint_pairs) os << " (" << i << "," << j << ")";
    }
    os << '\n';
  }
  if (two_path_warning) {
    os << "note: between-path spread estimated from only 2 paths\n";
  }
  return os.str();
}

}  // namespace snq
