#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "longrecipe/rng.hpp"

namespace longrecipe::synthesis {

enum class Scheme { LongRecipe, Pose, Rpes, Identity };

Scheme parse_scheme(std::string_view s);
std::string_view to_string(Scheme s);

// How the start of segment i follows segment i-1:
//   LiteralEq6:       start_i = start_{i-1} + len_{i-1} + gap_i + 1
//   ContinuousAtZero: start_i = start_{i-1} + len_{i-1} + gap_i
// Only the second makes max_skip = 0 produce contiguous indices.
enum class Convention { LiteralEq6, ContinuousAtZero };

Convention parse_convention(std::string_view s);
std::string_view to_string(Convention c);

enum class SegmentSource { Sentences, RandomChunks };

struct SynthesisConfig {
  std::uint32_t max_skip = 0;
  Convention convention = Convention::LiteralEq6;
  std::uint64_t seed = 0;
  SegmentSource segment_source = SegmentSource::Sentences;
  // Segment-count range for RandomChunks, clipped to [1, L].
  std::uint32_t min_chunks = 2;
  std::uint32_t max_chunks = 8;
  // Full redraws of the gap vector before falling back to clamping.
  std::uint32_t max_rejections = 64;

  void validate() const;
};

struct PositionPlan {
  std::string doc_id;
  std::uint64_t target_window = 0;
  std::uint32_t source_len = 0;
  std::vector<std::uint32_t> segment_lengths;
  // gaps[i] precedes segment i + 1; size is segment count - 1.
  std::vector<std::uint32_t> gaps;
  std::vector<std::uint32_t> positions;
  Scheme scheme = Scheme::LongRecipe;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  // Gap draws hit the rejection limit and the clamp fallback was used.
  bool clamped = false;
};

// Throws InvariantError on any violated structural property: positions
// strictly increasing and inside the window, unit steps inside a segment,
// segment lengths summing to the source length, and (for LongRecipe plans)
// every junction consistent with its gap, convention and max_skip.
void validate_plan(const PositionPlan& plan, std::optional<std::uint32_t> max_skip = std::nullopt,
                   Convention convention = Convention::LiteralEq6);

// Start offset contributed by one junction besides the gap.
constexpr std::uint32_t junction_step(Convention c) {
  return c == Convention::LiteralEq6 ? 1u : 0u;
}

// Spaces out the given segments: first segment starts at 0, each later one
// after a gap drawn uniformly from {0..max_skip}. Gap vectors whose last
// index would land past target_window - 1 are redrawn; after
// cfg.max_rejections redraws each gap is instead clamped to the remaining
// slack, so trailing gaps collapse to 0.
PositionPlan space_segments(std::string doc_id, std::span<const std::uint32_t> segment_lengths,
                            const SynthesisConfig& cfg, std::uint64_t target_window, Rng& rng);

// Sentence-segmented synthesis for one sample, seeded from
// (cfg.seed, doc_id, epoch).
PositionPlan synthesize(const std::string& doc_id,
                        std::span<const std::uint32_t> segment_lengths,
                        const SynthesisConfig& cfg, std::uint64_t target_window,
                        std::uint64_t epoch = 0);

// Fresh random chunking plus fresh gaps for a sample of `source_len` tokens,
// seeded from (cfg.seed, doc_id, epoch). Requires RandomChunks.
PositionPlan resample_plan(const std::string& doc_id, std::uint32_t source_len,
                           const SynthesisConfig& cfg, std::uint64_t target_window,
                           std::uint64_t epoch);

// Random cut points for `count` chunks of a length-`source_len` sample.
std::vector<std::uint32_t> random_chunks(std::uint32_t source_len, std::uint32_t count, Rng& rng);

// Two chunks [0, cut) and [cut, L); the second shifted by `bias`.
PositionPlan pose_plan_fixed(std::uint32_t source_len, std::uint64_t target_window,
                             std::uint32_t cut, std::uint64_t bias);

// PoSE baseline: cut uniform in [1, L-1], bias uniform in [0, L_hat - L].
PositionPlan pose_plan(std::uint32_t source_len, std::uint64_t target_window, std::uint64_t seed);

// RPES baseline: sorted uniform L-subset of {0..L_hat-1}.
PositionPlan rpes_plan(std::uint32_t source_len, std::uint64_t target_window, std::uint64_t seed);

PositionPlan identity_plan(std::uint32_t source_len, std::uint64_t target_window);

// Dispatches to the scheme's generator for one sample; the seed is derived
// from (cfg.seed, doc_id, epoch) so results do not depend on call order.
PositionPlan make_plan(Scheme scheme, const std::string& doc_id,
                       std::span<const std::uint32_t> segment_lengths, const SynthesisConfig& cfg,
                       std::uint64_t target_window, std::uint64_t epoch = 0);

}  // namespace longrecipe::synthesis
