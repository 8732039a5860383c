#include "longrecipe/compaction.hpp"

#include <algorithm>
#include <cmath>

#include "longrecipe/error.hpp"

namespace longrecipe::compaction {

void TokenizedDocument::validate() const {
  const std::string where = "document '" + doc_id + "'";
  require_input(!tokens.empty(), where + " has no tokens");
  require_input(!sentences.empty(), where + " has no sentences");
  std::uint32_t expect = 0;
  for (const auto& s : sentences) {
    require_input(s.begin == expect && s.end > s.begin,
                  where + ": sentence ranges must be sorted, non-empty and contiguous");
    expect = s.end;
  }
  require_input(expect == tokens.size(), where + ": sentence ranges do not cover all tokens");
}

SegmentUnit parse_segment_unit(std::string_view s) {
  if (s == "sentence") return SegmentUnit::Sentence;
  if (s == "paragraph") return SegmentUnit::Paragraph;
  throw InputError("unknown segment unit '" + std::string(s) + "'");
}

std::string_view to_string(SegmentUnit u) {
  return u == SegmentUnit::Sentence ? "sentence" : "paragraph";
}

namespace {

bool ends_sentence(std::string_view surface) {
  if (surface.find('\n') != std::string_view::npos) return true;
  while (!surface.empty() && (surface.back() == ' ' || surface.back() == '\t')) {
    surface.remove_suffix(1);
  }
  if (surface.empty()) return false;
  const char c = surface.back();
  return c == '.' || c == '!' || c == '?';
}

bool ends_paragraph(std::string_view surface) {
  return surface.find("\n\n") != std::string_view::npos;
}

}  // namespace

TokenizedDocument split_sentences(std::string doc_id, std::vector<Token> tokens,
                                  SegmentUnit unit) {
  require_input(!tokens.empty(), "split_sentences: document '" + doc_id + "' is empty");
  TokenizedDocument doc{std::move(doc_id), std::move(tokens), {}};
  std::uint32_t begin = 0;
  const auto n = static_cast<std::uint32_t>(doc.tokens.size());
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto& s = doc.tokens[i].surface;
    const bool boundary = unit == SegmentUnit::Sentence ? ends_sentence(s) : ends_paragraph(s);
    if (boundary) {
      doc.sentences.push_back({begin, i + 1});
      begin = i + 1;
    }
  }
  if (begin < n) doc.sentences.push_back({begin, n});
  return doc;
}

std::vector<std::uint32_t> filter_by_anchors(const TokenizedDocument& doc,
                                             const impact::AnchorSet& anchors) {
  require_input(!anchors.pos_types.empty(), "filter_by_anchors: empty anchor set");
  std::vector<std::uint32_t> kept;
  for (std::uint32_t sid = 0; sid < doc.sentences.size(); ++sid) {
    const auto& range = doc.sentences[sid];
    for (std::uint32_t t = range.begin; t < range.end; ++t) {
      if (anchors.contains(doc.tokens[t].pos_tag)) {
        kept.push_back(sid);
        break;
      }
    }
  }
  return kept;
}

std::uint32_t budget_for(double token_ratio, std::int64_t target_window) {
  require_input(token_ratio > 0.0 && token_ratio <= 1.0, "token_ratio must be in (0, 1]");
  require_input(target_window >= 1, "target window must be positive");
  const long long budget = std::llround(token_ratio * static_cast<double>(target_window));
  require_input(budget >= 1 && budget <= target_window,
                "token budget " + std::to_string(budget) + " outside [1, target window]");
  return static_cast<std::uint32_t>(budget);
}

CompactSample take_budget(const TokenizedDocument& doc, const std::vector<std::uint32_t>& kept,
                          std::uint32_t budget) {
  const std::string where = "document '" + doc.doc_id + "'";
  require_input(budget >= 1, "token budget must be >= 1");
  require_input(!kept.empty(), where + ": no sentences kept");
  for (std::size_t i = 0; i < kept.size(); ++i) {
    require_input(kept[i] < doc.sentences.size(), where + ": kept sentence id out of range");
    require_input(i == 0 || kept[i] > kept[i - 1], where + ": kept ids must be increasing");
  }

  // How many tokens each sentence contributes; 0 = not selected.
  std::vector<std::uint32_t> take(doc.sentences.size(), 0);
  std::vector<bool> is_kept(doc.sentences.size(), false);
  CompactSample out;
  out.doc_id = doc.doc_id;
  out.budget = budget;

  std::uint64_t total = 0;
  for (std::uint32_t sid : kept) {
    is_kept[sid] = true;
    if (total >= budget) continue;
    const std::uint32_t len = doc.sentences[sid].size();
    const auto room = static_cast<std::uint32_t>(budget - total);
    take[sid] = std::min(len, room);
    if (take[sid] < len) out.truncated_sentence = sid;
    total += take[sid];
    out.kept_sentence_ids.push_back(sid);
  }
  for (std::uint32_t sid = 0; sid < doc.sentences.size() && total < budget; ++sid) {
    if (is_kept[sid]) continue;
    const std::uint32_t len = doc.sentences[sid].size();
    const auto room = static_cast<std::uint32_t>(budget - total);
    take[sid] = std::min(len, room);
    if (take[sid] < len) out.truncated_sentence = sid;
    total += take[sid];
    out.backfilled_sentence_ids.push_back(sid);
  }
  require_input(total == budget, where + " has " + std::to_string(total) +
                                     " tokens, shorter than budget " + std::to_string(budget));

  out.tokens.reserve(budget);
  for (std::uint32_t sid = 0; sid < doc.sentences.size(); ++sid) {
    if (take[sid] == 0) continue;
    const auto begin = doc.tokens.begin() + doc.sentences[sid].begin;
    out.tokens.insert(out.tokens.end(), begin, begin + take[sid]);
    out.segment_lengths.push_back(take[sid]);
  }
  return out;
}

CompactSample compact(const TokenizedDocument& doc, const impact::AnchorSet& anchors,
                      std::uint32_t budget) {
  return take_budget(doc, filter_by_anchors(doc, anchors), budget);
}

}  // namespace longrecipe::compaction
