#include "longrecipe/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>

#include "longrecipe/error.hpp"

namespace longrecipe::io {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const char* src) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

template <typename T>
bool read_le(std::istream& in, T& value) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) return false;
  value = get_le<T>(buf);
  return true;
}

void put_fixed(std::ostream& out, const std::string& s, std::size_t width, const char* field) {
  require_input(s.size() <= width, std::string("binary dump: ") + field + " '" + s +
                                       "' longer than " + std::to_string(width) + " bytes");
  std::string padded = s;
  padded.resize(width, '\0');
  out.write(padded.data(), static_cast<std::streamsize>(width));
}

std::string get_fixed(const char* src, std::size_t width) {
  std::size_t n = 0;
  while (n < width && src[n] != '\0') ++n;
  return std::string(src, n);
}

}  // namespace

LineReader::LineReader(const std::filesystem::path& path)
    : owned_(std::make_unique<std::ifstream>(path)), in_(owned_.get()), source_(path.string()) {
  require_input(static_cast<bool>(*owned_), "cannot open " + source_);
}

LineReader::LineReader(std::istream& in) : in_(&in), source_("<stream>") {}

bool LineReader::next(std::string& line) {
  while (std::getline(*in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return true;
  }
  return false;
}

json parse_line(const std::string& line, const std::string& source, std::uint64_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(source + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
  }
}

impact::LogitRecord logit_from_json(const json& j) {
  impact::LogitRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.position = j.at("position").get<std::uint32_t>();
  r.token_id = j.at("token_id").get<std::uint32_t>();
  r.pos_tag = j.at("pos_tag").get<std::string>();
  r.logit_base = j.at("logit_base").get<double>();
  r.logit_ext = j.at("logit_ext").get<double>();
  if (auto it = j.find("topk_diffs"); it != j.end() && !it->is_null()) {
    for (const auto& e : *it) {
      r.topk_diffs.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<double>());
    }
  }
  impact::validate(r);
  return r;
}

json logit_to_json(const impact::LogitRecord& r) {
  json j = {{"doc_id", r.doc_id},         {"position", r.position},
            {"token_id", r.token_id},     {"pos_tag", r.pos_tag},
            {"logit_base", r.logit_base}, {"logit_ext", r.logit_ext}};
  if (!r.topk_diffs.empty()) {
    json topk = json::array();
    for (const auto& [id, d] : r.topk_diffs) topk.push_back({id, d});
    j["topk_diffs"] = std::move(topk);
  }
  return j;
}

void write_logit_binary_header(std::ostream& out) {
  out.write(kLogitMagic.data(), static_cast<std::streamsize>(kLogitMagic.size()));
}

void write_logit_binary(std::ostream& out, const impact::LogitRecord& r) {
  put_fixed(out, r.doc_id, 32, "doc_id");
  put_le<std::uint32_t>(out, r.position);
  put_le<std::uint32_t>(out, r.token_id);
  put_fixed(out, r.pos_tag, 8, "pos_tag");
  put_le<double>(out, r.logit_base);
  put_le<double>(out, r.logit_ext);
}

LogitReader::LogitReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  require_input(static_cast<bool>(in_), "cannot open logit dump " + path.string());
  char magic[8] = {};
  in_.read(magic, sizeof magic);
  if (in_.gcount() == 8 && std::string_view(magic, 8) == kLogitMagic) {
    binary_ = true;
  } else {
    in_.clear();
    in_.seekg(0);
  }
}

bool LogitReader::next(impact::LogitRecord& record) {
  if (binary_) {
    char buf[kLogitRecordBytes];
    in_.read(buf, sizeof buf);
    if (in_.gcount() == 0) return false;
    ++index_;
    require_input(in_.gcount() == static_cast<std::streamsize>(sizeof buf),
                  path_.string() + ": record " + std::to_string(index_) + " truncated");
    record.doc_id = get_fixed(buf, 32);
    record.position = get_le<std::uint32_t>(buf + 32);
    record.token_id = get_le<std::uint32_t>(buf + 36);
    record.pos_tag = get_fixed(buf + 40, 8);
    record.logit_base = get_le<double>(buf + 48);
    record.logit_ext = get_le<double>(buf + 56);
    record.topk_diffs.clear();
    try {
      impact::validate(record);
    } catch (const InputError& e) {
      throw InputError(path_.string() + ": record " + std::to_string(index_) + ": " + e.what());
    }
    return true;
  }
  while (std::getline(in_, line_)) {
    ++index_;
    if (line_.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = parse_line(line_, path_.string(), index_);
    try {
      record = logit_from_json(j);
    } catch (const json::exception& e) {
      throw InputError(path_.string() + ":" + std::to_string(index_) + ": schema error: " +
                       e.what());
    } catch (const InputError& e) {
      throw InputError(path_.string() + ":" + std::to_string(index_) + ": " + e.what());
    }
    return true;
  }
  return false;
}

compaction::TokenizedDocument document_from_json(const json& j, compaction::SegmentUnit unit) {
  std::string doc_id = j.at("doc_id").get<std::string>();
  std::vector<compaction::Token> tokens;
  for (const auto& t : j.at("tokens")) {
    require_input(t.is_array() && t.size() == 3,
                  "document '" + doc_id + "': tokens must be [id, surface, tag] triples");
    tokens.push_back({t.at(0).get<std::uint32_t>(), t.at(1).get<std::string>(),
                      t.at(2).get<std::string>()});
  }
  if (auto it = j.find("sentence_bounds"); it != j.end() && !it->is_null()) {
    compaction::TokenizedDocument doc{std::move(doc_id), std::move(tokens), {}};
    for (const auto& b : *it) {
      doc.sentences.push_back({b.at(0).get<std::uint32_t>(), b.at(1).get<std::uint32_t>()});
    }
    doc.validate();
    return doc;
  }
  return compaction::split_sentences(std::move(doc_id), std::move(tokens), unit);
}

namespace {

json tokens_to_json(const std::vector<compaction::Token>& tokens) {
  json out = json::array();
  for (const auto& t : tokens) out.push_back({t.id, t.surface, t.pos_tag});
  return out;
}

std::vector<compaction::Token> tokens_from_json(const json& j) {
  std::vector<compaction::Token> tokens;
  for (const auto& t : j) {
    tokens.push_back({t.at(0).get<std::uint32_t>(), t.at(1).get<std::string>(),
                      t.at(2).get<std::string>()});
  }
  return tokens;
}

}  // namespace

json document_to_json(const compaction::TokenizedDocument& doc) {
  json bounds = json::array();
  for (const auto& s : doc.sentences) bounds.push_back({s.begin, s.end});
  return {{"doc_id", doc.doc_id},
          {"tokens", tokens_to_json(doc.tokens)},
          {"sentence_bounds", std::move(bounds)}};
}

json compact_to_json(const compaction::CompactSample& s) {
  return {{"doc_id", s.doc_id},
          {"budget", s.budget},
          {"tokens", tokens_to_json(s.tokens)},
          {"segment_lengths", s.segment_lengths},
          {"kept_sentence_ids", s.kept_sentence_ids},
          {"backfilled_sentence_ids", s.backfilled_sentence_ids},
          {"truncated", s.truncated()},
          {"truncated_sentence",
           s.truncated_sentence ? json(*s.truncated_sentence) : json(nullptr)}};
}

compaction::CompactSample compact_from_json(const json& j) {
  compaction::CompactSample s;
  s.doc_id = j.at("doc_id").get<std::string>();
  s.budget = j.at("budget").get<std::uint32_t>();
  s.tokens = tokens_from_json(j.at("tokens"));
  s.segment_lengths = j.at("segment_lengths").get<std::vector<std::uint32_t>>();
  s.kept_sentence_ids = j.at("kept_sentence_ids").get<std::vector<std::uint32_t>>();
  s.backfilled_sentence_ids = j.value("backfilled_sentence_ids", std::vector<std::uint32_t>{});
  if (auto it = j.find("truncated_sentence"); it != j.end() && !it->is_null()) {
    s.truncated_sentence = it->get<std::uint32_t>();
  }
  std::uint64_t total = 0;
  for (auto len : s.segment_lengths) total += len;
  require_input(total == s.tokens.size(),
                "compact sample '" + s.doc_id + "': segment lengths do not match token count");
  return s;
}

json anchors_to_json(const impact::AnchorSet& a) {
  return {{"pos_types", a.pos_types},
          {"scores", a.scores},
          {"rule", a.rule == impact::AnchorRule::Pooled ? "pooled" : "mean_over_positions"},
          {"short_of_k", a.short_of_k}};
}

impact::AnchorSet anchors_from_json(const json& j) {
  impact::AnchorSet a;
  a.pos_types = j.at("pos_types").get<std::vector<std::string>>();
  a.scores = j.value("scores", std::map<std::string, double>{});
  a.rule = j.value("rule", std::string("mean_over_positions")) == "pooled"
               ? impact::AnchorRule::Pooled
               : impact::AnchorRule::MeanOverPositions;
  a.short_of_k = j.value("short_of_k", false);
  require_input(!a.pos_types.empty(), "anchor file lists no POS types");
  return a;
}

json plan_to_json(const synthesis::PositionPlan& plan,
                  const std::vector<std::uint32_t>& token_ids) {
  require_input(token_ids.size() == plan.positions.size(),
                "plan for '" + plan.doc_id + "' does not match its token count");
  return {{"doc_id", plan.doc_id},
          {"scheme", synthesis::to_string(plan.scheme)},
          {"target_window", plan.target_window},
          {"seed", plan.seed},
          {"epoch", plan.epoch},
          {"segment_lengths", plan.segment_lengths},
          {"gaps", plan.gaps},
          {"token_ids", token_ids},
          {"position_ids", plan.positions}};
}

DatasetRecord dataset_record_from_json(const json& j) {
  DatasetRecord r;
  auto& p = r.plan;
  p.doc_id = j.at("doc_id").get<std::string>();
  p.scheme = synthesis::parse_scheme(j.at("scheme").get<std::string>());
  p.target_window = j.at("target_window").get<std::uint64_t>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.epoch = j.at("epoch").get<std::uint64_t>();
  p.segment_lengths = j.at("segment_lengths").get<std::vector<std::uint32_t>>();
  p.gaps = j.at("gaps").get<std::vector<std::uint32_t>>();
  p.positions = j.at("position_ids").get<std::vector<std::uint32_t>>();
  p.source_len = static_cast<std::uint32_t>(p.positions.size());
  r.token_ids = j.at("token_ids").get<std::vector<std::uint32_t>>();
  require_input(r.token_ids.size() == p.positions.size(),
                "dataset record '" + p.doc_id + "': token/position count mismatch");
  return r;
}

void write_dataset_binary_header(std::ostream& out) {
  out.write(kDatasetMagic.data(), static_cast<std::streamsize>(kDatasetMagic.size()));
}

void write_dataset_binary(std::ostream& out, const synthesis::PositionPlan& plan,
                          const std::vector<std::uint32_t>& token_ids) {
  require_input(token_ids.size() == plan.positions.size(),
                "plan for '" + plan.doc_id + "' does not match its token count");
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(plan.doc_id.size()));
  out.write(plan.doc_id.data(), static_cast<std::streamsize>(plan.doc_id.size()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(plan.scheme));
  put_le<std::uint64_t>(out, plan.seed);
  put_le<std::uint64_t>(out, plan.epoch);
  put_le<std::uint64_t>(out, plan.target_window);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(token_ids.size()));
  for (auto t : token_ids) put_le<std::uint32_t>(out, t);
  for (auto p : plan.positions) put_le<std::uint32_t>(out, p);
}

bool read_dataset_binary(std::istream& in, DatasetRecord& record) {
  std::uint32_t id_len = 0;
  if (!read_le(in, id_len)) {
    require_input(in.gcount() == 0, "packed dataset: truncated record header");
    return false;
  }
  auto& p = record.plan;
  p = {};
  p.doc_id.resize(id_len);
  std::uint8_t scheme = 0;
  std::uint32_t n = 0;
  const bool ok = in.read(p.doc_id.data(), id_len) && read_le(in, scheme) && read_le(in, p.seed) &&
                  read_le(in, p.epoch) && read_le(in, p.target_window) && read_le(in, n);
  require_input(ok, "packed dataset: truncated record");
  require_input(scheme <= static_cast<std::uint8_t>(synthesis::Scheme::Identity),
                "packed dataset: unknown scheme code " + std::to_string(scheme));
  p.scheme = static_cast<synthesis::Scheme>(scheme);
  record.token_ids.resize(n);
  p.positions.resize(n);
  for (auto& t : record.token_ids) require_input(read_le(in, t), "packed dataset: truncated tokens");
  for (auto& q : p.positions) require_input(read_le(in, q), "packed dataset: truncated positions");
  p.source_len = n;
  return true;
}

}  // namespace longrecipe::io
