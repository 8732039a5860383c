#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "longrecipe/impact.hpp"

namespace longrecipe::compaction {

struct Token {
  std::uint32_t id = 0;
  std::string surface;
  std::string pos_tag;

  bool operator==(const Token&) const = default;
};

// Half-open token range [begin, end).
struct SentenceRange {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  std::uint32_t size() const { return end - begin; }
  bool operator==(const SentenceRange&) const = default;
};

struct TokenizedDocument {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<SentenceRange> sentences;

  // Ranges must be sorted, disjoint, non-empty, and cover every token.
  void validate() const;
};

enum class SegmentUnit { Sentence, Paragraph };

SegmentUnit parse_segment_unit(std::string_view s);
std::string_view to_string(SegmentUnit u);

// Sentence mode: a sentence ends after any token whose surface (ignoring
// trailing spaces and tabs) ends in '.', '!' or '?', or that contains '\n'.
// Paragraph mode: a segment ends after any token containing a blank line.
TokenizedDocument split_sentences(std::string doc_id, std::vector<Token> tokens,
                                  SegmentUnit unit = SegmentUnit::Sentence);

// Ids of sentences with at least one token tagged with an anchor type, in
// document order.
std::vector<std::uint32_t> filter_by_anchors(const TokenizedDocument& doc,
                                             const impact::AnchorSet& anchors);

struct CompactSample {
  std::string doc_id;
  std::vector<std::uint32_t> kept_sentence_ids;
  // Anchor-free sentences pulled in because the kept ones fell short.
  std::vector<std::uint32_t> backfilled_sentence_ids;
  std::vector<Token> tokens;
  // Length of every emitted sentence piece, in output order; these are the
  // segments that position synthesis spaces apart.
  std::vector<std::uint32_t> segment_lengths;
  std::uint32_t budget = 0;
  // Sentence cut short to land exactly on the budget, if any.
  std::optional<std::uint32_t> truncated_sentence;

  bool truncated() const { return truncated_sentence.has_value(); }
  bool backfilled() const { return !backfilled_sentence_ids.empty(); }
};

// round(token_ratio * target_window); throws unless 1 <= budget <= window.
std::uint32_t budget_for(double token_ratio, std::int64_t target_window);

inline constexpr double kDefaultTokenRatio = 0.30;

// Takes kept sentences in order until `budget` tokens are reached, cutting
// the last one to fit. When the kept sentences are short, removed sentences
// are added in document order and the last of those is the one cut, so
// every kept sentence survives whole. Output preserves document order.
CompactSample take_budget(const TokenizedDocument& doc, const std::vector<std::uint32_t>& kept,
                          std::uint32_t budget);

// filter_by_anchors followed by take_budget.
CompactSample compact(const TokenizedDocument& doc, const impact::AnchorSet& anchors,
                      std::uint32_t budget);

}  // namespace longrecipe::compaction
