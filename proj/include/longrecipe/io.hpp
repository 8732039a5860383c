#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "longrecipe/compaction.hpp"
#include "longrecipe/impact.hpp"
#include "longrecipe/synthesis.hpp"

namespace longrecipe::io {

using nlohmann::json;

// Reads '\n'-separated records, skipping blank lines, tracking line numbers.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);
  explicit LineReader(std::istream& in);

  bool next(std::string& line);
  std::uint64_t line_number() const { return line_no_; }
  const std::string& source() const { return source_; }

 private:
  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_;
  std::string source_;
  std::uint64_t line_no_ = 0;
};

// ---- logit dumps ----------------------------------------------------------

impact::LogitRecord logit_from_json(const json& j);
json logit_to_json(const impact::LogitRecord& r);

// Binary dump: 8-byte magic "LRLOGIT1", then 64-byte little-endian records:
//   char doc_id[32] (NUL padded), u32 position, u32 token_id,
//   char pos_tag[8] (NUL padded), f64 logit_base, f64 logit_ext.
// Top-k diffs are not representable.
inline constexpr std::string_view kLogitMagic = "LRLOGIT1";
inline constexpr std::size_t kLogitRecordBytes = 64;

void write_logit_binary_header(std::ostream& out);
void write_logit_binary(std::ostream& out, const impact::LogitRecord& r);

// Streams either dump variant, detected from the first 8 bytes. Schema
// errors are reported as InputError with the line (or record) number.
class LogitReader {
 public:
  explicit LogitReader(const std::filesystem::path& path);
  bool next(impact::LogitRecord& record);
  bool binary() const { return binary_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  bool binary_ = false;
  std::uint64_t index_ = 0;
  std::string line_;
};

// ---- corpus and compacted samples -----------------------------------------

// {"doc_id": str, "tokens": [[id, surface, tag], ...],
//  "sentence_bounds": [[begin, end], ...]}  (bounds optional)
compaction::TokenizedDocument document_from_json(const json& j, compaction::SegmentUnit unit);
json document_to_json(const compaction::TokenizedDocument& doc);

json compact_to_json(const compaction::CompactSample& s);
compaction::CompactSample compact_from_json(const json& j);

json anchors_to_json(const impact::AnchorSet& a);
impact::AnchorSet anchors_from_json(const json& j);

// ---- synthesized dataset --------------------------------------------------

json plan_to_json(const synthesis::PositionPlan& plan, const std::vector<std::uint32_t>& token_ids);

struct DatasetRecord {
  synthesis::PositionPlan plan;
  std::vector<std::uint32_t> token_ids;
};

DatasetRecord dataset_record_from_json(const json& j);

// Packed dataset: 8-byte magic "LRPOS001", then per record (little endian):
//   u32 doc_id_len, doc_id bytes, u8 scheme, u64 seed, u64 epoch,
//   u64 target_window, u32 n, u32 token_ids[n], u32 position_ids[n].
inline constexpr std::string_view kDatasetMagic = "LRPOS001";

void write_dataset_binary_header(std::ostream& out);
void write_dataset_binary(std::ostream& out, const synthesis::PositionPlan& plan,
                          const std::vector<std::uint32_t>& token_ids);
// Returns false at a clean end of stream; throws on truncation.
bool read_dataset_binary(std::istream& in, DatasetRecord& record);

// Parses one JSON line with a file:line prefix on failure.
json parse_line(const std::string& line, const std::string& source, std::uint64_t line_no);

}  // namespace longrecipe::io
