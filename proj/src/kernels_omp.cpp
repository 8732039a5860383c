#include <omp.h>

#include <cstdlib>
#include <string>

#include "longrecipe/error.hpp"
#include "longrecipe/kernels.hpp"

namespace longrecipe {

int configure_workers() {
  if (const char* env = std::getenv("LONGRECIPE_WORKERS"); env && *env) {
    int n = 0;
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw InputError(std::string("LONGRECIPE_WORKERS is not an integer: ") + env);
    }
    require_input(n >= 1, "LONGRECIPE_WORKERS must be >= 1");
    omp_set_num_threads(n);
    return n;
  }
  return omp_get_max_threads();
}

namespace kernels {

void merge_weighted(std::span<const float> a, std::span<const float> b, double l1, double l2,
                    std::span<float> out) {
  require_input(a.size() == b.size() && a.size() == out.size(), "merge_weighted: size mismatch");
  const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(l1 * static_cast<double>(a[i]) + l2 * static_cast<double>(b[i]));
  }
}

std::vector<std::uint64_t> distance_histogram(std::span<const std::uint32_t> positions,
                                              std::uint64_t window) {
  std::vector<std::uint64_t> hist(window, 0);
  const auto n = static_cast<std::ptrdiff_t>(positions.size());
  if (n > 0) require_input(positions.back() < window, "distance_histogram: position outside window");
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(window, 0);
#pragma omp for schedule(dynamic, 16) nowait
    for (std::ptrdiff_t j = 1; j < n; ++j) {
      const std::uint32_t pj = positions[j];
      for (std::ptrdiff_t i = 0; i < j; ++i) ++local[pj - positions[i]];
    }
    // integer counts: reduction order does not matter
#pragma omp critical
    for (std::uint64_t d = 0; d < window; ++d) hist[d] += local[d];
  }
  return hist;
}

std::vector<synthesis::PositionPlan> make_plans(std::span<const PlanRequest> requests,
                                                const synthesis::SynthesisConfig& cfg,
                                                std::uint64_t target_window) {
  std::vector<synthesis::PositionPlan> plans(requests.size());
  const auto n = static_cast<std::ptrdiff_t>(requests.size());
  // Exceptions may not leave an OpenMP region; keep the first by index.
  std::vector<std::exception_ptr> errors(requests.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& r = requests[i];
      plans[i] = synthesis::make_plan(r.scheme, r.doc_id, r.segment_lengths, cfg, target_window,
                                      r.epoch);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return plans;
}

std::vector<metrics::PlanStats> plan_stats(std::span<const synthesis::PositionPlan> plans) {
  std::vector<metrics::PlanStats> stats(plans.size());
  const auto n = static_cast<std::ptrdiff_t>(plans.size());
  std::vector<std::exception_ptr> errors(plans.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      stats[i] = metrics::plan_stats(plans[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return stats;
}

impact::SignificanceTable significance(std::span<const impact::LogitRecord> records,
                                       impact::GroupBy group_by) {
  const std::size_t shards = (records.size() + kSignificanceShard - 1) / kSignificanceShard;
  std::vector<impact::SignificanceAccumulator> partial(shards,
                                                       impact::SignificanceAccumulator(group_by));
  std::vector<std::exception_ptr> errors(shards);
  const auto n = static_cast<std::ptrdiff_t>(shards);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    try {
      const std::size_t begin = s * kSignificanceShard;
      const std::size_t end = std::min(records.size(), begin + kSignificanceShard);
      for (std::size_t i = begin; i < end; ++i) partial[s].add(records[i]);
    } catch (...) {
      errors[s] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  impact::SignificanceAccumulator total(group_by);
  for (const auto& p : partial) total.merge(p);
  return total.table();
}

}  // namespace kernels
}  // namespace longrecipe
