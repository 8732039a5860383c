#include "longrecipe/metrics.hpp"

#include <cstdio>
#include <map>
#include <ostream>

#include "longrecipe/error.hpp"
#include "longrecipe/kernels.hpp"

namespace longrecipe::metrics {

double avg_pairwise_distance(std::span<const std::uint32_t> positions) {
  const std::size_t n = positions.size();
  require_input(n >= 2, "average pairwise distance needs at least 2 tokens");
  // Each p_j appears with + sign j times and with - sign (n - 1 - j) times.
  __int128 sum = 0;
  for (std::size_t j = 0; j < n; ++j) {
    sum += static_cast<__int128>(positions[j]) *
           (2 * static_cast<__int128>(j) - static_cast<__int128>(n) + 1);
  }
  const __int128 pairs = static_cast<__int128>(n) * (n - 1) / 2;
  constexpr __int128 kExact = __int128{1} << 53;
  if (sum < kExact && pairs < kExact) {
    // both operands exact in double, so the quotient is correctly rounded
    return static_cast<double>(sum) / static_cast<double>(pairs);
  }
  return static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(pairs));
}

double avg_adjacent_distance(std::span<const std::uint32_t> positions) {
  require_input(positions.size() >= 2, "average adjacent distance needs at least 2 tokens");
  return static_cast<double>(positions.back() - positions.front()) /
         static_cast<double>(positions.size() - 1);
}

std::size_t run_count(std::span<const std::uint32_t> positions) {
  if (positions.empty()) return 0;
  std::size_t runs = 1;
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (positions[i] != positions[i - 1] + 1) ++runs;
  }
  return runs;
}

double avg_run_length(std::span<const std::uint32_t> positions) {
  require_input(!positions.empty(), "average run length needs at least 1 token");
  return static_cast<double>(positions.size()) / static_cast<double>(run_count(positions));
}

PlanStats plan_stats(const synthesis::PositionPlan& plan) {
  PlanStats s;
  s.scheme = plan.scheme;
  s.source_len = plan.source_len;
  s.target_window = plan.target_window;
  s.avg_run_length = avg_run_length(plan.positions);
  if (plan.positions.size() >= 2) {
    s.avg_pairwise_distance = avg_pairwise_distance(plan.positions);
    s.avg_adjacent_distance = avg_adjacent_distance(plan.positions);
  }
  return s;
}

namespace {

void fill_ratios(std::vector<SchemeRow>& rows) {
  const SchemeRow* pose = nullptr;
  const SchemeRow* rpes = nullptr;
  for (const auto& r : rows) {
    if (r.scheme == synthesis::Scheme::Pose) pose = &r;
    if (r.scheme == synthesis::Scheme::Rpes) rpes = &r;
  }
  for (auto& r : rows) {
    if (pose && pose->avg_distance > 0) r.distance_ratio_vs_pose = r.avg_distance / pose->avg_distance;
    if (rpes && rpes->avg_distance > 0) r.distance_ratio_vs_rpes = r.avg_distance / rpes->avg_distance;
  }
}

SchemeRow reduce(synthesis::Scheme scheme, std::span<const PlanStats> stats) {
  SchemeRow row;
  row.scheme = scheme;
  row.plans = stats.size();
  if (stats.empty()) return row;
  row.target_window = stats.front().target_window;
  for (const auto& s : stats) {
    row.mean_source_len += s.source_len;
    row.avg_distance += s.avg_pairwise_distance;
    row.avg_adjacent_distance += s.avg_adjacent_distance;
    row.avg_run_length += s.avg_run_length;
  }
  const double n = static_cast<double>(stats.size());
  row.mean_source_len /= n;
  row.avg_distance /= n;
  row.avg_adjacent_distance /= n;
  row.avg_run_length /= n;
  return row;
}

}  // namespace

std::vector<SchemeRow> compare_schemes(std::span<const SampleShape> samples,
                                       std::span<const synthesis::Scheme> schemes,
                                       const CompareOptions& options) {
  require_input(!schemes.empty(), "compare_schemes: no schemes given");
  require_input(!samples.empty(), "compare_schemes: no samples given");
  require_input(options.plans_per_sample >= 1, "compare_schemes: plans_per_sample must be >= 1");
  std::vector<SchemeRow> rows;
  for (auto scheme : schemes) {
    std::vector<PlanRequest> requests;
    requests.reserve(samples.size() * options.plans_per_sample);
    for (const auto& sample : samples) {
      for (std::uint32_t e = 0; e < options.plans_per_sample; ++e) {
        requests.push_back({scheme, sample.doc_id, sample.segment_lengths, e});
      }
    }
    const auto plans = kernels::make_plans(requests, options.synthesis, options.target_window);
    const auto stats = kernels::plan_stats(plans);
    rows.push_back(reduce(scheme, stats));
  }
  fill_ratios(rows);
  return rows;
}

std::vector<SchemeRow> summarize_plans(std::span<const synthesis::PositionPlan> plans) {
  require_input(!plans.empty(), "summarize_plans: no plans");
  const auto stats = kernels::plan_stats(plans);
  std::vector<synthesis::Scheme> order;
  std::map<synthesis::Scheme, std::vector<PlanStats>> grouped;
  for (const auto& s : stats) {
    if (!grouped.contains(s.scheme)) order.push_back(s.scheme);
    grouped[s.scheme].push_back(s);
  }
  std::vector<SchemeRow> rows;
  for (auto scheme : order) rows.push_back(reduce(scheme, grouped[scheme]));
  fill_ratios(rows);
  return rows;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

void write_comparison_csv(std::ostream& out, std::span<const SchemeRow> rows) {
  out << "scheme,plans,L,L_hat,avg_distance,avg_adjacent_distance,avg_run_length,"
         "distance_ratio_vs_pose,distance_ratio_vs_rpes\n";
  for (const auto& r : rows) {
    out << synthesis::to_string(r.scheme) << ',' << r.plans << ',' << num(r.mean_source_len)
        << ',' << r.target_window << ',' << num(r.avg_distance) << ','
        << num(r.avg_adjacent_distance) << ',' << num(r.avg_run_length) << ','
        << opt(r.distance_ratio_vs_pose) << ',' << opt(r.distance_ratio_vs_rpes) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, synthesis::Scheme scheme,
                         std::span<const std::uint64_t> histogram) {
  for (std::size_t d = 1; d < histogram.size(); ++d) {
    if (histogram[d] != 0) {
      out << synthesis::to_string(scheme) << ',' << d << ',' << histogram[d] << '\n';
    }
  }
}

}  // namespace longrecipe::metrics
