#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace longrecipe::impact {

// One realized token from a logit dump: the logit the base model and the
// extended model assign to the token that actually occurs at `position`.
struct LogitRecord {
  std::string doc_id;
  std::uint32_t position = 0;
  std::uint32_t token_id = 0;
  std::string pos_tag;
  double logit_base = 0;
  double logit_ext = 0;
  // Optional (token_id, logit_ext - logit_base) pairs over the top-k vocab.
  std::vector<std::pair<std::uint32_t, double>> topk_diffs;

  double diff() const { return logit_ext - logit_base; }
  double magnitude() const;
};

// Throws InputError naming the doc id when logits are non-finite, the tag is
// empty, or top-k ids repeat.
void validate(const LogitRecord& record);

// softmax over logit differences. Entries absent from a top-k list carry
// probability zero.
std::vector<double> diff_distribution(std::span<const double> diffs);
std::vector<double> diff_distribution(std::span<const std::pair<std::uint32_t, double>> topk);

// Shannon entropy (nats) of diff_distribution(topk); a per-token diagnostic.
double diff_entropy(std::span<const std::pair<std::uint32_t, double>> topk);

enum class GroupBy { PosTag, TokenId };

GroupBy parse_group_by(std::string_view s);
std::string_view to_string(GroupBy g);
std::string type_key(const LogitRecord& record, GroupBy group_by);

struct SignificanceTable {
  GroupBy group_by = GroupBy::PosTag;
  // Sum over occurrences of |logit_ext - logit_base| per token type.
  std::map<std::string, double> delta;
  std::map<std::string, std::uint64_t> occurrences;
  std::uint64_t sample_count = 0;  // distinct doc ids
  std::uint64_t record_count = 0;

  // Types ordered by descending delta, ties by key.
  std::vector<std::pair<std::string, double>> ranked() const;
};

// Single-pass accumulator for SignificanceTable. Partial accumulators merge
// associatively and commutatively, so a record stream can be sharded.
class SignificanceAccumulator {
 public:
  explicit SignificanceAccumulator(GroupBy group_by = GroupBy::PosTag) : group_by_(group_by) {}

  void add(const LogitRecord& record);
  void merge(const SignificanceAccumulator& other);
  SignificanceTable table() const;

  GroupBy group_by() const { return group_by_; }
  std::uint64_t record_count() const { return records_; }

 private:
  GroupBy group_by_;
  std::map<std::string, double> delta_;
  std::map<std::string, std::uint64_t> occurrences_;
  std::set<std::string> docs_;
  std::uint64_t records_ = 0;
};

SignificanceTable significance_scores(std::span<const LogitRecord> records,
                                      GroupBy group_by = GroupBy::PosTag);

inline constexpr std::uint32_t kDefaultPositionBin = 256;
inline constexpr double kDefaultTopFraction = 0.20;

struct SelectedToken {
  std::string doc_id;
  std::uint32_t token_id = 0;
  std::uint32_t position = 0;
  std::string pos_tag;
  double score = 0;

  bool operator==(const SelectedToken&) const = default;
};

// Ranking used for selection: larger score first, then doc_id, token_id and
// position ascending.
bool ranks_before(const SelectedToken& a, const SelectedToken& b);

// Position bin -> selected tokens, each bin in rank order.
using Selection = std::map<std::uint32_t, std::vector<SelectedToken>>;

std::size_t top_count(double fraction, std::size_t n);

// Keeps the ceil(fraction * n) highest-|diff| tokens in every position bin
// (bin = position / bin_width).
Selection top_fraction_by_position(std::span<const LogitRecord> records, double fraction,
                                   std::uint32_t bin_width = kDefaultPositionBin);

// Re-selection over an existing selection (idempotent at fraction 1.0).
Selection top_fraction_by_position(const Selection& selection, double fraction);

// Streaming form of top_fraction_by_position for dumps read twice: the first
// pass counts tokens per bin, the second offers every record and keeps only
// bounded per-bin heaps.
class TopFractionSelector {
 public:
  TopFractionSelector(double fraction, std::uint32_t bin_width);

  void count(const LogitRecord& record);
  void offer(const LogitRecord& record);
  Selection finish() &&;

 private:
  struct Bin {
    std::uint64_t n = 0;
    std::size_t keep = 0;
    std::vector<SelectedToken> heap;
  };
  double fraction_;
  std::uint32_t bin_width_;
  std::map<std::uint32_t, Bin> bins_;
};

// Bin -> POS label -> relative frequency within the bin's selection.
using PosProfile = std::map<std::uint32_t, std::map<std::string, double>>;

PosProfile pos_frequency_profile(const Selection& selection);

enum class AnchorRule { MeanOverPositions, Pooled };

struct AnchorSet {
  std::vector<std::string> pos_types;  // rank order
  std::map<std::string, double> scores;
  AnchorRule rule = AnchorRule::MeanOverPositions;
  // Set when fewer than k labels were observed; all labels are returned.
  bool short_of_k = false;

  bool contains(std::string_view tag) const;
};

// Top-k labels by mean frequency across bins (a bin lacking a label counts 0).
AnchorSet derive_anchors(const PosProfile& profile, std::size_t k);

// Top-k labels by frequency over the whole selection, bins pooled.
AnchorSet derive_anchors_pooled(const Selection& selection, std::size_t k);

// Closed-class lookup used to tag synthetic fixtures: digits -> NUM, a few
// pronoun/auxiliary/adposition/conjunction word lists, everything else X.
std::string fixture_tag(std::string_view surface);

}  // namespace longrecipe::impact
