#include "longrecipe/impact.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "longrecipe/error.hpp"

namespace longrecipe::impact {

double LogitRecord::magnitude() const { return std::fabs(logit_ext - logit_base); }

void validate(const LogitRecord& record) {
  const std::string where = "record doc_id='" + record.doc_id + "' position=" +
                            std::to_string(record.position);
  require_input(!record.doc_id.empty(), "record with empty doc_id at position " +
                                            std::to_string(record.position));
  require_input(std::isfinite(record.logit_base) && std::isfinite(record.logit_ext),
                where + ": logits must be finite");
  require_input(!record.pos_tag.empty(), where + ": empty pos_tag");
  if (!record.topk_diffs.empty()) {
    std::unordered_set<std::uint32_t> seen;
    for (const auto& [id, d] : record.topk_diffs) {
      require_input(std::isfinite(d), where + ": non-finite top-k diff");
      require_input(seen.insert(id).second,
                    where + ": duplicate top-k token id " + std::to_string(id));
    }
  }
}

std::vector<double> diff_distribution(std::span<const double> diffs) {
  require_input(!diffs.empty(), "diff_distribution: empty input");
  double peak = diffs[0];
  for (double d : diffs) {
    require_input(std::isfinite(d), "diff_distribution: non-finite diff");
    peak = std::max(peak, d);
  }
  std::vector<double> out(diffs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    out[i] = std::exp(diffs[i] - peak);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

std::vector<double> diff_distribution(std::span<const std::pair<std::uint32_t, double>> topk) {
  std::vector<double> diffs;
  diffs.reserve(topk.size());
  for (const auto& entry : topk) diffs.push_back(entry.second);
  return diff_distribution(diffs);
}

double diff_entropy(std::span<const std::pair<std::uint32_t, double>> topk) {
  double h = 0.0;
  for (double p : diff_distribution(topk)) {
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

GroupBy parse_group_by(std::string_view s) {
  if (s == "pos_tag" || s == "pos") return GroupBy::PosTag;
  if (s == "token_id" || s == "token") return GroupBy::TokenId;
  throw InputError("unknown group_by '" + std::string(s) + "' (expected pos_tag or token_id)");
}

std::string_view to_string(GroupBy g) { return g == GroupBy::PosTag ? "pos_tag" : "token_id"; }

std::string type_key(const LogitRecord& record, GroupBy group_by) {
  return group_by == GroupBy::PosTag ? record.pos_tag : std::to_string(record.token_id);
}

std::vector<std::pair<std::string, double>> SignificanceTable::ranked() const {
  std::vector<std::pair<std::string, double>> out(delta.begin(), delta.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

void SignificanceAccumulator::add(const LogitRecord& record) {
  validate(record);
  const std::string key = type_key(record, group_by_);
  delta_[key] += record.magnitude();
  ++occurrences_[key];
  docs_.insert(record.doc_id);
  ++records_;
}

void SignificanceAccumulator::merge(const SignificanceAccumulator& other) {
  require_input(group_by_ == other.group_by_, "cannot merge tables with different grouping");
  for (const auto& [k, v] : other.delta_) delta_[k] += v;
  for (const auto& [k, v] : other.occurrences_) occurrences_[k] += v;
  docs_.insert(other.docs_.begin(), other.docs_.end());
  records_ += other.records_;
}

SignificanceTable SignificanceAccumulator::table() const {
  SignificanceTable t;
  t.group_by = group_by_;
  t.delta = delta_;
  t.occurrences = occurrences_;
  t.sample_count = docs_.size();
  t.record_count = records_;
  return t;
}

SignificanceTable significance_scores(std::span<const LogitRecord> records, GroupBy group_by) {
  SignificanceAccumulator acc(group_by);
  for (const auto& r : records) acc.add(r);
  return acc.table();
}

bool ranks_before(const SelectedToken& a, const SelectedToken& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
  if (a.token_id != b.token_id) return a.token_id < b.token_id;
  return a.position < b.position;
}

std::size_t top_count(double fraction, std::size_t n) {
  require_input(fraction > 0.0 && fraction <= 1.0,
                "top fraction must be in (0, 1], got " + std::to_string(fraction));
  if (n == 0) return 0;
  // The slack absorbs representation error, e.g. 0.3 * 10 = 3.0000000000000004.
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

namespace {

SelectedToken to_selected(const LogitRecord& r) {
  return SelectedToken{r.doc_id, r.token_id, r.position, r.pos_tag, r.magnitude()};
}

}  // namespace

Selection top_fraction_by_position(std::span<const LogitRecord> records, double fraction,
                                   std::uint32_t bin_width) {
  require_input(bin_width >= 1, "position bin width must be >= 1");
  top_count(fraction, 1);
  Selection bins;
  for (const auto& r : records) {
    validate(r);
    bins[r.position / bin_width].push_back(to_selected(r));
  }
  return top_fraction_by_position(bins, fraction);
}

Selection top_fraction_by_position(const Selection& selection, double fraction) {
  Selection out;
  for (const auto& [bin, tokens] : selection) {
    std::vector<SelectedToken> sorted = tokens;
    std::sort(sorted.begin(), sorted.end(), ranks_before);
    sorted.resize(top_count(fraction, sorted.size()));
    out.emplace(bin, std::move(sorted));
  }
  return out;
}

TopFractionSelector::TopFractionSelector(double fraction, std::uint32_t bin_width)
    : fraction_(fraction), bin_width_(bin_width) {
  require_input(bin_width >= 1, "position bin width must be >= 1");
  top_count(fraction, 1);
}

void TopFractionSelector::count(const LogitRecord& record) {
  ++bins_[record.position / bin_width_].n;
}

void TopFractionSelector::offer(const LogitRecord& record) {
  auto it = bins_.find(record.position / bin_width_);
  require_input(it != bins_.end(), "record offered to selector without a counting pass");
  Bin& bin = it->second;
  if (bin.keep == 0) bin.keep = top_count(fraction_, bin.n);
  SelectedToken t = to_selected(record);
  // max-heap under ranks_before: front is the worst kept token
  if (bin.heap.size() < bin.keep) {
    bin.heap.push_back(std::move(t));
    std::push_heap(bin.heap.begin(), bin.heap.end(), ranks_before);
  } else if (ranks_before(t, bin.heap.front())) {
    std::pop_heap(bin.heap.begin(), bin.heap.end(), ranks_before);
    bin.heap.back() = std::move(t);
    std::push_heap(bin.heap.begin(), bin.heap.end(), ranks_before);
  }
}

Selection TopFractionSelector::finish() && {
  Selection out;
  for (auto& [key, bin] : bins_) {
    std::sort(bin.heap.begin(), bin.heap.end(), ranks_before);
    out.emplace(key, std::move(bin.heap));
  }
  return out;
}

PosProfile pos_frequency_profile(const Selection& selection) {
  PosProfile profile;
  for (const auto& [bin, tokens] : selection) {
    if (tokens.empty()) continue;
    std::map<std::string, std::uint64_t> counts;
    for (const auto& t : tokens) ++counts[t.pos_tag];
    auto& freq = profile[bin];
    const double total = static_cast<double>(tokens.size());
    for (const auto& [tag, c] : counts) freq[tag] = static_cast<double>(c) / total;
  }
  require_input(!profile.empty(), "pos_frequency_profile: empty selection");
  return profile;
}

namespace {

AnchorSet top_k_labels(std::map<std::string, double> scores, std::size_t k, AnchorRule rule) {
  require_input(k >= 1, "anchor count must be >= 1");
  std::vector<std::pair<std::string, double>> ranked(scores.begin(), scores.end());
  // map iteration is already lexicographic; stable sort keeps that for ties
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  AnchorSet out;
  out.rule = rule;
  out.short_of_k = k > ranked.size();
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
    out.pos_types.push_back(ranked[i].first);
    out.scores.emplace(ranked[i].first, ranked[i].second);
  }
  return out;
}

}  // namespace

AnchorSet derive_anchors(const PosProfile& profile, std::size_t k) {
  require_input(!profile.empty(), "derive_anchors: empty profile");
  std::map<std::string, double> sums;
  for (const auto& [bin, freq] : profile) {
    for (const auto& [tag, f] : freq) sums[tag] += f;
  }
  const double bins = static_cast<double>(profile.size());
  for (auto& [tag, s] : sums) s /= bins;
  return top_k_labels(std::move(sums), k, AnchorRule::MeanOverPositions);
}

AnchorSet derive_anchors_pooled(const Selection& selection, std::size_t k) {
  std::map<std::string, double> counts;
  std::uint64_t total = 0;
  for (const auto& [bin, tokens] : selection) {
    for (const auto& t : tokens) {
      counts[t.pos_tag] += 1.0;
      ++total;
    }
  }
  require_input(total > 0, "derive_anchors: empty selection");
  for (auto& [tag, c] : counts) c /= static_cast<double>(total);
  return top_k_labels(std::move(counts), k, AnchorRule::Pooled);
}

bool AnchorSet::contains(std::string_view tag) const {
  return std::find(pos_types.begin(), pos_types.end(), tag) != pos_types.end();
}

std::string fixture_tag(std::string_view surface) {
  std::size_t b = 0, e = surface.size();
  auto trim = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
  while (b < e && trim(surface[b])) ++b;
  while (e > b && trim(surface[e - 1])) --e;
  const std::string_view core = surface.substr(b, e - b);
  if (core.empty()) return "X";

  bool has_digit = false, numeric = true;
  for (unsigned char c : core) {
    if (std::isdigit(c)) has_digit = true;
    else if (c != ',' && c != '.') numeric = false;
  }
  if (has_digit && numeric) return "NUM";

  std::string word;
  for (unsigned char c : core) word.push_back(static_cast<char>(std::tolower(c)));
  static const std::set<std::string, std::less<>> pron = {
      "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them",
      "this", "that", "these", "those", "who", "what", "which", "its", "their", "our"};
  static const std::set<std::string, std::less<>> aux = {
      "is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had",
      "do", "does", "did", "will", "would", "can", "could", "shall", "should", "may",
      "might", "must"};
  static const std::set<std::string, std::less<>> adp = {
      "in", "on", "at", "of", "to", "from", "by", "with", "for", "about", "over",
      "under", "into", "through", "between", "after", "before", "during"};
  static const std::set<std::string, std::less<>> cconj = {"and", "or", "but", "nor", "yet",
                                                           "so"};
  if (pron.contains(word)) return "PRON";
  if (aux.contains(word)) return "AUX";
  if (adp.contains(word)) return "ADP";
  if (cconj.contains(word)) return "CCONJ";
  return "X";
}

}  // namespace longrecipe::impact
