#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "longrecipe/synthesis.hpp"

namespace longrecipe::metrics {

// Mean of (p_j - p_i) over all pairs i < j of a sorted position array,
// via sum_j p_j * (2j - L + 1) / C(L, 2) in exact integer arithmetic.
double avg_pairwise_distance(std::span<const std::uint32_t> positions);

// Mean gap between neighbours, (p_last - p_first) / (L - 1).
double avg_adjacent_distance(std::span<const std::uint32_t> positions);

// Mean length of maximal runs with step exactly 1.
double avg_run_length(std::span<const std::uint32_t> positions);

std::size_t run_count(std::span<const std::uint32_t> positions);

struct PlanStats {
  synthesis::Scheme scheme = synthesis::Scheme::LongRecipe;
  std::uint32_t source_len = 0;
  std::uint64_t target_window = 0;
  double avg_pairwise_distance = 0;
  double avg_adjacent_distance = 0;
  double avg_run_length = 0;
};

PlanStats plan_stats(const synthesis::PositionPlan& plan);

// One sample's segmentation; plans for every scheme are generated from it.
struct SampleShape {
  std::string doc_id;
  std::vector<std::uint32_t> segment_lengths;
};

struct SchemeRow {
  synthesis::Scheme scheme = synthesis::Scheme::LongRecipe;
  std::uint64_t plans = 0;
  double mean_source_len = 0;
  std::uint64_t target_window = 0;
  double avg_distance = 0;
  double avg_adjacent_distance = 0;
  double avg_run_length = 0;
  std::optional<double> distance_ratio_vs_pose;
  std::optional<double> distance_ratio_vs_rpes;
};

struct CompareOptions {
  synthesis::SynthesisConfig synthesis;
  std::uint64_t target_window = 0;
  // Plans drawn per sample per scheme; epoch tags 0..n-1.
  std::uint32_t plans_per_sample = 1;
};

// Mean statistics per scheme over plans_per_sample plans of every sample.
// Rows come out in the order of `schemes`; ratio columns are filled when the
// pose / rpes rows are present.
std::vector<SchemeRow> compare_schemes(std::span<const SampleShape> samples,
                                       std::span<const synthesis::Scheme> schemes,
                                       const CompareOptions& options);

// Same, for plans already generated (e.g. read back from a dataset file).
std::vector<SchemeRow> summarize_plans(std::span<const synthesis::PositionPlan> plans);

void write_comparison_csv(std::ostream& out, std::span<const SchemeRow> rows);

// Histogram rows "scheme,distance,count" for non-zero bins.
void write_histogram_csv(std::ostream& out, synthesis::Scheme scheme,
                         std::span<const std::uint64_t> histogram);

}  // namespace longrecipe::metrics
