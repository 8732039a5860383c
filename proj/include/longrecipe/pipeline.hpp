#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "longrecipe/config.hpp"
#include "longrecipe/impact.hpp"
#include "longrecipe/metrics.hpp"

namespace longrecipe::pipeline {

namespace fs = std::filesystem;

using Counts = std::map<std::string, std::uint64_t>;

// Output written to "<path>.partial" and renamed into place by commit().
// A file that is never committed stays behind under the .partial name.
class StagedFile {
 public:
  explicit StagedFile(fs::path path, bool binary = false);
  StagedFile(const StagedFile&) = delete;
  StagedFile& operator=(const StagedFile&) = delete;

  std::ofstream& stream() { return out_; }
  const fs::path& path() const { return path_; }
  void commit();

 private:
  fs::path path_;
  fs::path partial_;
  std::ofstream out_;
  bool committed_ = false;
};

struct AnalyzeResult {
  impact::SignificanceTable table;
  impact::Selection selection;
  impact::PosProfile profile;
  impact::AnchorSet anchors;
  std::set<std::string> dump_docs;
  Counts counts;
};

// Reads the logit dump twice (significance + bin counts, then bounded top
// fraction selection) and writes significance.json, significance.csv,
// profile.csv and anchors.json into out_dir; diff_entropy.csv as well when
// the dump carries top-k diffs. Nothing is written if the dump is invalid
// or empty.
AnalyzeResult run_analyze(const RecipeConfig& cfg, const fs::path& out_dir);

struct CompactResult {
  Counts counts;
  std::vector<std::string> corpus_doc_ids;
};

// Streams the corpus in batches of cfg.batch_size documents, compacting each
// document in parallel and writing records in corpus order. Documents with
// no anchor sentence, or too short for the budget, are skipped and counted.
CompactResult run_compact(const RecipeConfig& cfg, const impact::AnchorSet& anchors,
                          const fs::path& out_path, const std::set<std::string>* dump_docs = nullptr);

// Position plans for every compacted sample and epoch, validated before
// writing. Writes the JSONL dataset and, if requested, the packed variant.
Counts run_synthesize(const RecipeConfig& cfg, const fs::path& compact_path,
                      const fs::path& out_jsonl, const fs::path* out_bin = nullptr);

// Comparison table over cfg.compare_schemes and an optional distance
// histogram, from the segmentations in a compact file.
std::vector<metrics::SchemeRow> run_stats(const RecipeConfig& cfg, const fs::path& compact_path,
                                          const fs::path& out_csv,
                                          const fs::path* out_histogram = nullptr);

// Merges cfg.ckpt_a and cfg.ckpt_b into cfg.merged and writes
// "<merged>.manifest.json" next to it.
Counts run_merge(const RecipeConfig& cfg);

// analyze (or external anchors) -> compact -> synthesize -> stats, plus the
// replay subset and manifest.json, all under cfg.output_dir.
void run_pipeline(const RecipeConfig& cfg);

// Checks shared by every command: ranges, distinct paths, mandatory seed.
void validate_config(const RecipeConfig& cfg);

std::string sha256_file(const fs::path& path);
std::string sha256_hex(std::string_view bytes);

}  // namespace longrecipe::pipeline
