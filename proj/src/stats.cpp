#include "scalesim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scalesim/errors.hpp"

namespace scalesim {

namespace {

// Two-sided 95% Student-t critical values by degrees of freedom (1..30);
// the normal value is used beyond the table.
constexpr double kT95[] = {
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
    2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
};

double t_critical_95(std::size_t df) {
  if (df == 0) return 0.0;
  if (df <= 30) return kT95[df - 1];
  return 1.960;
}

}  // namespace

RunMetrics summarize_run(std::span<const StepRecord> records) {
  if (records.empty()) throw ProtocolError("stats: cannot summarize an empty run");
  RunMetrics m;
  std::size_t violated = 0;
  double replicas = 0.0, latency = 0.0;
  for (const auto& r : records) {
    if (r.sla_violated) ++violated;
    m.total_cost_replica_minutes += r.cost_units;
    replicas += r.active_replicas + r.warming_replicas;
    latency += r.latency_ms;
  }
  const auto n = static_cast<double>(records.size());
  m.sla_violation_rate = static_cast<double>(violated) / n;
  m.avg_replicas = replicas / n;
  m.avg_latency_ms = latency / n;
  return m;
}

double objective_aggregate(std::span<const StepRecord> records, const MpcWeights& weights,
                           int n_max) {
  double total = 0.0;
  int prev = records.empty() ? 0 : records.front().active_replicas +
                                       records.front().warming_replicas;
  for (const auto& r : records) {
    const int n = r.active_replicas + r.warming_replicas;
    total += objective_step_cost(r.violation_fraction, n, prev, n_max, weights);
    prev = n;
  }
  return total;
}

MeanCi mean_ci95(std::span<const double> values) {
  MeanCi out;
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;

  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  out.half_width = t_critical_95(values.size() - 1) * sd / std::sqrt(n);
  return out;
}

PairedTestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ProtocolError("stats: wilcoxon needs equal-length samples");
  if (a.size() < 2) throw ProtocolError("stats: wilcoxon needs at least 2 pairs");

  PairedTestResult result;
  result.n_pairs = static_cast<int>(a.size());

  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  result.n_nonzero = static_cast<int>(diffs.size());
  if (diffs.empty()) {
    result.degenerate_all_zero = true;
    result.p_value = 1.0;
    return result;
  }

  // Rank |d| ascending with mid-ranks for ties.
  const std::size_t m = diffs.size();
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    return std::fabs(diffs[x]) < std::fabs(diffs[y]);
  });
  std::vector<double> ranks(m, 0.0);
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m &&
           std::fabs(diffs[idx[j + 1]]) == std::fabs(diffs[idx[i]])) {
      ++j;
    }
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = mid;
    i = j + 1;
  }

  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    (diffs[i] > 0.0 ? w_plus : w_minus) += ranks[i];
  }
  result.statistic_w = std::min(w_plus, w_minus);

  if (m <= 25) {
    // Exact null distribution by subset-sum counting over doubled ranks
    // (mid-ranks become integers after doubling).
    std::vector<long long> doubled(m);
    long long total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      doubled[i] = std::llround(ranks[i] * 2.0);
      total += doubled[i];
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (long long s = total; s >= doubled[i]; --s) {
        count[static_cast<std::size_t>(s)] +=
            count[static_cast<std::size_t>(s - doubled[i])];
      }
    }
    const long long w_doubled = std::llround(result.statistic_w * 2.0);
    double favorable = 0.0;
    for (long long s = 0; s <= total; ++s) {
      if (std::min(s, total - s) <= w_doubled) {
        favorable += count[static_cast<std::size_t>(s)];
      }
    }
    result.p_value = favorable / std::pow(2.0, static_cast<double>(m));
  } else {
    const double mm = static_cast<double>(m);
    const double mean = mm * (mm + 1.0) / 4.0;
    const double sd = std::sqrt(mm * (mm + 1.0) * (2.0 * mm + 1.0) / 24.0);
    const double z = (result.statistic_w - mean + 0.5) / sd;
    result.p_value = std::min(1.0, std::erfc(-z / std::sqrt(2.0)));
  }

  result.significant_at_005 = result.p_value < 0.05;
  return result;
}

double wilcoxon_min_p(int n_nonzero) {
  if (n_nonzero <= 0) return 1.0;
  // Only the all-plus and all-minus assignments reach W = 0.
  return std::min(1.0, 2.0 / std::pow(2.0, static_cast<double>(n_nonzero)));
}

}  // namespace scalesim
