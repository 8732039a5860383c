#include <algorithm>

#include "longrecipe/error.hpp"
#include "longrecipe/kernels.hpp"

namespace longrecipe::reference {

void merge_weighted(std::span<const float> a, std::span<const float> b, double l1, double l2,
                    std::span<float> out) {
  require_input(a.size() == b.size() && a.size() == out.size(), "merge_weighted: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<float>(l1 * static_cast<double>(a[i]) + l2 * static_cast<double>(b[i]));
  }
}

std::vector<std::uint64_t> distance_histogram(std::span<const std::uint32_t> positions,
                                              std::uint64_t window) {
  std::vector<std::uint64_t> hist(window, 0);
  if (!positions.empty()) {
    require_input(positions.back() < window, "distance_histogram: position outside window");
  }
  for (std::size_t j = 1; j < positions.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) ++hist[positions[j] - positions[i]];
  }
  return hist;
}

std::vector<synthesis::PositionPlan> make_plans(std::span<const PlanRequest> requests,
                                                const synthesis::SynthesisConfig& cfg,
                                                std::uint64_t target_window) {
  std::vector<synthesis::PositionPlan> plans;
  plans.reserve(requests.size());
  for (const auto& r : requests) {
    plans.push_back(
        synthesis::make_plan(r.scheme, r.doc_id, r.segment_lengths, cfg, target_window, r.epoch));
  }
  return plans;
}

std::vector<metrics::PlanStats> plan_stats(std::span<const synthesis::PositionPlan> plans) {
  std::vector<metrics::PlanStats> stats;
  stats.reserve(plans.size());
  for (const auto& p : plans) stats.push_back(metrics::plan_stats(p));
  return stats;
}

impact::SignificanceTable significance(std::span<const impact::LogitRecord> records,
                                       impact::GroupBy group_by) {
  impact::SignificanceAccumulator total(group_by);
  for (std::size_t begin = 0; begin < records.size(); begin += kSignificanceShard) {
    impact::SignificanceAccumulator shard(group_by);
    const std::size_t end = std::min(records.size(), begin + kSignificanceShard);
    for (std::size_t i = begin; i < end; ++i) shard.add(records[i]);
    total.merge(shard);
  }
  return total.table();
}

double avg_pairwise_distance(std::span<const std::uint32_t> positions) {
  require_input(positions.size() >= 2, "need at least 2 tokens");
  long double sum = 0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      sum += static_cast<long double>(positions[j]) - positions[i];
      ++pairs;
    }
  }
  return static_cast<double>(sum / pairs);
}

}  // namespace longrecipe::reference
