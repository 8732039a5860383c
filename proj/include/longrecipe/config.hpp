#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace longrecipe {

inline constexpr int kConfigSchemaVersion = 1;

// Every knob of the recipe. Loaded from a "key = value" file, overridable
// from the command line; the effective values go into the run manifest.
struct RecipeConfig {
  // windows
  std::int64_t source_window = 0;  // 0: not given
  std::int64_t target_window = 0;
  double token_ratio = 0.30;

  // analysis
  double top_fraction = 0.20;
  std::uint32_t position_bin = 256;
  std::string group_by = "pos_tag";
  std::uint32_t anchor_count = 3;
  std::string anchor_rule = "mean_over_positions";

  // compaction
  std::string segment_unit = "sentence";

  // synthesis
  std::string scheme = "longrecipe";
  std::uint32_t max_skip = 0;
  std::string convention = "literal_eq6";
  std::string segment_source = "sentences";
  std::uint32_t min_chunks = 2;
  std::uint32_t max_chunks = 8;
  std::uint32_t max_rejections = 64;
  std::uint32_t epochs = 1;
  bool binary_dataset = false;

  // stats
  std::string compare_schemes = "longrecipe,pose,rpes";
  std::uint32_t stats_plans_per_sample = 1;
  bool histogram = false;

  // merging and replay
  double lambda1 = 0.5;
  double lambda2 = 0.5;
  double replay_fraction = 0.05;

  // rope preset recorded in the manifest
  std::string model_family;
  std::uint32_t head_dim = 128;

  std::optional<std::uint64_t> seed;
  std::uint32_t batch_size = 64;

  // paths
  std::string corpus;
  std::string logits;
  std::string anchors;
  std::string compact;
  std::string dataset;
  std::string output_dir;
  std::string ckpt_a;
  std::string ckpt_b;
  std::string merged;

  // Sets one key from its text form; InputError for unknown keys or values
  // that do not parse.
  void set(const std::string& key, const std::string& value);

  // Canonical "key = value" lines in key order. Paths that only name where
  // outputs go (output_dir, merged) are left out so that relocating a run
  // does not change its manifest.
  std::map<std::string, std::string> effective(bool include_output_paths = false) const;
  std::string dump() const;

  std::uint32_t budget() const;
  std::uint64_t require_seed() const;

  static const std::vector<std::string>& keys();
};

// Reads a config file. Requires "schema_version = 1"; '#' starts a comment.
RecipeConfig load_config(const std::filesystem::path& path);
RecipeConfig parse_config(const std::string& text, const std::string& source = "<config>");

}  // namespace longrecipe
