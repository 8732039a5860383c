#include "longrecipe/synthesis.hpp"

#include <algorithm>
#include <numeric>

#include "longrecipe/error.hpp"

namespace longrecipe::synthesis {

Scheme parse_scheme(std::string_view s) {
  if (s == "longrecipe") return Scheme::LongRecipe;
  if (s == "pose") return Scheme::Pose;
  if (s == "rpes") return Scheme::Rpes;
  if (s == "identity") return Scheme::Identity;
  throw InputError("unknown scheme '" + std::string(s) + "'");
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::LongRecipe: return "longrecipe";
    case Scheme::Pose: return "pose";
    case Scheme::Rpes: return "rpes";
    case Scheme::Identity: return "identity";
  }
  return "?";
}

Convention parse_convention(std::string_view s) {
  if (s == "literal_eq6") return Convention::LiteralEq6;
  if (s == "continuous_at_zero") return Convention::ContinuousAtZero;
  throw InputError("unknown convention '" + std::string(s) + "'");
}

std::string_view to_string(Convention c) {
  return c == Convention::LiteralEq6 ? "literal_eq6" : "continuous_at_zero";
}

void SynthesisConfig::validate() const {
  if (segment_source == SegmentSource::RandomChunks) {
    require_input(min_chunks >= 1 && min_chunks <= max_chunks,
                  "random chunk count range must satisfy 1 <= min <= max");
  }
}

void validate_plan(const PositionPlan& plan, std::optional<std::uint32_t> max_skip,
                   Convention convention) {
  const std::string where = "plan for '" + plan.doc_id + "' (" +
                            std::string(to_string(plan.scheme)) + ")";
  require_invariant(plan.source_len >= 1, where + ": empty plan");
  require_invariant(plan.positions.size() == plan.source_len,
                    where + ": position count differs from source length");
  require_invariant(!plan.segment_lengths.empty() &&
                        plan.gaps.size() + 1 == plan.segment_lengths.size(),
                    where + ": gap count must be segment count - 1");
  std::uint64_t total = 0;
  for (auto len : plan.segment_lengths) {
    require_invariant(len >= 1, where + ": empty segment");
    total += len;
  }
  require_invariant(total == plan.source_len, where + ": segment lengths do not sum to L");
  require_invariant(plan.positions.back() < plan.target_window,
                    where + ": position beyond target window");

  const std::uint32_t step =
      plan.scheme == Scheme::LongRecipe ? junction_step(convention) : 0u;
  std::size_t t = 0;
  for (std::size_t s = 0; s < plan.segment_lengths.size(); ++s) {
    if (s == 0) {
      require_invariant(plan.scheme != Scheme::LongRecipe || plan.positions[0] == 0,
                        where + ": first segment must start at 0");
    } else {
      const std::uint32_t gap = plan.gaps[s - 1];
      if (max_skip && plan.scheme == Scheme::LongRecipe) {
        require_invariant(gap <= *max_skip, where + ": gap exceeds max_skip");
      }
      const std::uint64_t expected = std::uint64_t{plan.positions[t - 1]} + gap + step + 1;
      require_invariant(plan.positions[t] == expected,
                        where + ": junction " + std::to_string(s) + " inconsistent with its gap");
    }
    for (std::uint32_t k = 1; k < plan.segment_lengths[s]; ++k) {
      require_invariant(plan.positions[t + k] == plan.positions[t + k - 1] + 1,
                        where + ": non-unit step inside segment " + std::to_string(s));
    }
    t += plan.segment_lengths[s];
  }
  for (std::size_t i = 1; i < plan.positions.size(); ++i) {
    require_invariant(plan.positions[i] > plan.positions[i - 1],
                      where + ": positions not strictly increasing");
  }
}

namespace {

void lay_out(PositionPlan& plan, std::uint32_t step) {
  plan.positions.clear();
  plan.positions.reserve(plan.source_len);
  std::uint64_t start = 0;
  for (std::size_t s = 0; s < plan.segment_lengths.size(); ++s) {
    if (s > 0) start += plan.gaps[s - 1] + step;
    for (std::uint32_t k = 0; k < plan.segment_lengths[s]; ++k) {
      plan.positions.push_back(static_cast<std::uint32_t>(start + k));
    }
    start += plan.segment_lengths[s];
  }
}

std::vector<std::uint32_t> runs_of(std::span<const std::uint32_t> positions,
                                   std::vector<std::uint32_t>& gaps) {
  std::vector<std::uint32_t> runs;
  gaps.clear();
  std::uint32_t run = 1;
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (positions[i] == positions[i - 1] + 1) {
      ++run;
    } else {
      runs.push_back(run);
      gaps.push_back(positions[i] - positions[i - 1] - 1);
      run = 1;
    }
  }
  if (!positions.empty()) runs.push_back(run);
  return runs;
}

std::uint32_t checked_length(std::span<const std::uint32_t> segment_lengths) {
  require_input(!segment_lengths.empty(), "no segments to synthesize");
  std::uint64_t total = 0;
  for (auto len : segment_lengths) {
    require_input(len >= 1, "segments must be non-empty");
    total += len;
  }
  require_input(total <= 0xffffffffULL, "sample too long");
  return static_cast<std::uint32_t>(total);
}

}  // namespace

PositionPlan space_segments(std::string doc_id, std::span<const std::uint32_t> segment_lengths,
                            const SynthesisConfig& cfg, std::uint64_t target_window, Rng& rng) {
  const std::uint32_t source_len = checked_length(segment_lengths);
  require_input(source_len <= target_window,
                "sample '" + doc_id + "' of " + std::to_string(source_len) +
                    " tokens is longer than target window " + std::to_string(target_window));
  const std::size_t junctions = segment_lengths.size() - 1;
  const std::uint32_t step = junction_step(cfg.convention);
  const std::uint64_t min_last = source_len - 1 + std::uint64_t{step} * junctions;
  require_input(min_last <= target_window - 1,
                "sample '" + doc_id + "' cannot fit " + std::to_string(segment_lengths.size()) +
                    " segments into window " + std::to_string(target_window) +
                    " even with zero gaps");
  const std::uint64_t slack = target_window - 1 - min_last;

  PositionPlan plan;
  plan.doc_id = std::move(doc_id);
  plan.target_window = target_window;
  plan.source_len = source_len;
  plan.segment_lengths.assign(segment_lengths.begin(), segment_lengths.end());
  plan.gaps.assign(junctions, 0);
  plan.scheme = Scheme::LongRecipe;

  if (cfg.max_skip > 0 && junctions > 0) {
    bool accepted = false;
    for (std::uint32_t attempt = 0; attempt < cfg.max_rejections && !accepted; ++attempt) {
      std::uint64_t sum = 0;
      for (auto& g : plan.gaps) {
        g = static_cast<std::uint32_t>(rng.uniform(0, cfg.max_skip));
        sum += g;
      }
      accepted = sum <= slack;
    }
    if (!accepted) {
      std::uint64_t remaining = slack;
      for (auto& g : plan.gaps) {
        const std::uint64_t draw = rng.uniform(0, cfg.max_skip);
        g = static_cast<std::uint32_t>(std::min(draw, remaining));
        remaining -= g;
      }
      plan.clamped = true;
    }
  }
  lay_out(plan, step);
  return plan;
}

PositionPlan synthesize(const std::string& doc_id, std::span<const std::uint32_t> segment_lengths,
                        const SynthesisConfig& cfg, std::uint64_t target_window,
                        std::uint64_t epoch) {
  const std::uint64_t seed = derive_seed(cfg.seed, doc_id, epoch);
  Rng rng(seed);
  PositionPlan plan = space_segments(doc_id, segment_lengths, cfg, target_window, rng);
  plan.seed = seed;
  plan.epoch = epoch;
  return plan;
}

std::vector<std::uint32_t> random_chunks(std::uint32_t source_len, std::uint32_t count,
                                         Rng& rng) {
  require_input(source_len >= 1 && count >= 1 && count <= source_len,
                "chunk count must be in [1, L]");
  const auto cuts = sample_sorted_subset(source_len - 1, count - 1, rng);
  std::vector<std::uint32_t> lengths;
  lengths.reserve(count);
  std::uint32_t prev = 0;
  for (auto c : cuts) {
    const auto cut = static_cast<std::uint32_t>(c + 1);
    lengths.push_back(cut - prev);
    prev = cut;
  }
  lengths.push_back(source_len - prev);
  return lengths;
}

PositionPlan resample_plan(const std::string& doc_id, std::uint32_t source_len,
                           const SynthesisConfig& cfg, std::uint64_t target_window,
                           std::uint64_t epoch) {
  require_input(cfg.segment_source == SegmentSource::RandomChunks,
                "resample_plan requires random-chunk segmentation");
  cfg.validate();
  require_input(source_len >= 1, "cannot resample an empty sample");
  const std::uint64_t seed = derive_seed(cfg.seed, doc_id, epoch);
  Rng rng(seed);
  const std::uint32_t lo = std::clamp<std::uint32_t>(cfg.min_chunks, 1, source_len);
  const std::uint32_t hi = std::clamp<std::uint32_t>(cfg.max_chunks, lo, source_len);
  const auto count = static_cast<std::uint32_t>(rng.uniform(lo, hi));
  const auto lengths = random_chunks(source_len, count, rng);
  PositionPlan plan = space_segments(doc_id, lengths, cfg, target_window, rng);
  plan.seed = seed;
  plan.epoch = epoch;
  return plan;
}

PositionPlan pose_plan_fixed(std::uint32_t source_len, std::uint64_t target_window,
                             std::uint32_t cut, std::uint64_t bias) {
  require_input(source_len >= 1, "PoSE: empty sample");
  require_input(source_len <= target_window, "PoSE: sample longer than target window");
  require_input(bias <= target_window - source_len, "PoSE: bias pushes past target window");
  PositionPlan plan;
  plan.target_window = target_window;
  plan.source_len = source_len;
  plan.scheme = Scheme::Pose;
  if (source_len == 1) {
    require_input(cut == 0 || cut == 1, "PoSE: cut out of range");
    plan.segment_lengths = {1};
    plan.positions = {0};
    return plan;
  }
  require_input(cut >= 1 && cut < source_len, "PoSE: cut must be in [1, L-1]");
  plan.segment_lengths = {cut, source_len - cut};
  plan.gaps = {static_cast<std::uint32_t>(bias)};
  lay_out(plan, 0);
  return plan;
}

PositionPlan pose_plan(std::uint32_t source_len, std::uint64_t target_window, std::uint64_t seed) {
  require_input(source_len >= 1, "PoSE: empty sample");
  require_input(source_len <= target_window, "PoSE: sample longer than target window");
  Rng rng(seed);
  const auto cut =
      source_len == 1 ? 1u : static_cast<std::uint32_t>(rng.uniform(1, source_len - 1));
  const std::uint64_t bias = rng.uniform(0, target_window - source_len);
  PositionPlan plan = pose_plan_fixed(source_len, target_window, cut, bias);
  plan.seed = seed;
  return plan;
}

PositionPlan rpes_plan(std::uint32_t source_len, std::uint64_t target_window, std::uint64_t seed) {
  require_input(source_len >= 1, "RPES: empty sample");
  require_input(source_len <= target_window, "RPES: sample longer than target window");
  Rng rng(seed);
  PositionPlan plan;
  plan.target_window = target_window;
  plan.source_len = source_len;
  plan.scheme = Scheme::Rpes;
  plan.seed = seed;
  const auto picked = sample_sorted_subset(target_window, source_len, rng);
  plan.positions.assign(picked.begin(), picked.end());
  plan.segment_lengths = runs_of(plan.positions, plan.gaps);
  return plan;
}

PositionPlan identity_plan(std::uint32_t source_len, std::uint64_t target_window) {
  require_input(source_len >= 1 && source_len <= target_window,
                "identity plan needs 1 <= L <= target window");
  PositionPlan plan;
  plan.target_window = target_window;
  plan.source_len = source_len;
  plan.scheme = Scheme::Identity;
  plan.segment_lengths = {source_len};
  plan.positions.resize(source_len);
  std::iota(plan.positions.begin(), plan.positions.end(), 0u);
  return plan;
}

PositionPlan make_plan(Scheme scheme, const std::string& doc_id,
                       std::span<const std::uint32_t> segment_lengths, const SynthesisConfig& cfg,
                       std::uint64_t target_window, std::uint64_t epoch) {
  const std::uint32_t source_len = checked_length(segment_lengths);
  PositionPlan plan;
  switch (scheme) {
    case Scheme::LongRecipe:
      if (cfg.segment_source == SegmentSource::RandomChunks) {
        return resample_plan(doc_id, source_len, cfg, target_window, epoch);
      }
      return synthesize(doc_id, segment_lengths, cfg, target_window, epoch);
    case Scheme::Pose:
      plan = pose_plan(source_len, target_window, derive_seed(cfg.seed, doc_id, epoch));
      break;
    case Scheme::Rpes:
      plan = rpes_plan(source_len, target_window, derive_seed(cfg.seed, doc_id, epoch));
      break;
    case Scheme::Identity:
      plan = identity_plan(source_len, target_window);
      break;
  }
  plan.doc_id = doc_id;
  plan.epoch = epoch;
  return plan;
}

}  // namespace longrecipe::synthesis
