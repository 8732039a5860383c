#pragma once

// Data-parallel kernels (OpenMP) and the serial reference implementations
// they are tested and benchmarked against. Every kernel produces output that
// is bit-identical to its reference, independent of the thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "longrecipe/impact.hpp"
#include "longrecipe/metrics.hpp"
#include "longrecipe/synthesis.hpp"

namespace longrecipe {

struct PlanRequest {
  synthesis::Scheme scheme = synthesis::Scheme::LongRecipe;
  std::string doc_id;
  std::vector<std::uint32_t> segment_lengths;
  std::uint64_t epoch = 0;
};

// Records per shard for sharded significance accumulation. Shard boundaries
// depend only on this constant, so sums are reduced in the same order for
// any worker count.
inline constexpr std::size_t kSignificanceShard = 4096;

namespace kernels {

// out[i] = float(l1 * a[i] + l2 * b[i]), evaluated in double.
void merge_weighted(std::span<const float> a, std::span<const float> b, double l1, double l2,
                    std::span<float> out);

// histogram[d] = number of pairs i < j with p_j - p_i == d; size window.
std::vector<std::uint64_t> distance_histogram(std::span<const std::uint32_t> positions,
                                              std::uint64_t window);

std::vector<synthesis::PositionPlan> make_plans(std::span<const PlanRequest> requests,
                                                const synthesis::SynthesisConfig& cfg,
                                                std::uint64_t target_window);

std::vector<metrics::PlanStats> plan_stats(std::span<const synthesis::PositionPlan> plans);

impact::SignificanceTable significance(std::span<const impact::LogitRecord> records,
                                       impact::GroupBy group_by);

}  // namespace kernels

namespace reference {

void merge_weighted(std::span<const float> a, std::span<const float> b, double l1, double l2,
                    std::span<float> out);

std::vector<std::uint64_t> distance_histogram(std::span<const std::uint32_t> positions,
                                              std::uint64_t window);

std::vector<synthesis::PositionPlan> make_plans(std::span<const PlanRequest> requests,
                                                const synthesis::SynthesisConfig& cfg,
                                                std::uint64_t target_window);

std::vector<metrics::PlanStats> plan_stats(std::span<const synthesis::PositionPlan> plans);

impact::SignificanceTable significance(std::span<const impact::LogitRecord> records,
                                       impact::GroupBy group_by);

// O(L^2) mean over all pairs, summed in long double.
double avg_pairwise_distance(std::span<const std::uint32_t> positions);

}  // namespace reference

// Worker count for OpenMP regions: LONGRECIPE_WORKERS if set, else the
// OpenMP default. Returns the value applied.
int configure_workers();

}  // namespace longrecipe
