#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace longrecipe::rope {

inline constexpr double kDefaultBase = 10000.0;

// Head dimension and frequency base for rotary embeddings. Pairs are laid
// out interleaved: (v[0], v[1]), (v[2], v[3]), ...
struct RopeParams {
  int head_dim = 0;
  double base = kDefaultBase;
  std::optional<std::string> preset_name;
  std::optional<double> factor;

  RopeParams() = default;
  RopeParams(int head_dim_, double base_ = kDefaultBase);

  int pair_count() const { return head_dim / 2; }
};

using HeadVector = std::vector<double>;

// base^(-2i/D) for frequency index i in [0, D/2).
double theta(int i, const RopeParams& params);

// Full frequency table, theta(0) .. theta(D/2 - 1).
std::vector<double> theta_table(const RopeParams& params);

// Rotates each interleaved pair (v[2i], v[2i+1]) by angle position * theta_i.
// position may be negative to apply the inverse rotation.
HeadVector apply(std::span<const double> v, double position, const RopeParams& params);

// <apply(q, m), apply(k, n)>. Depends on q, k and m - n only.
double score(std::span<const double> q, std::span<const double> k, double m, double n,
             const RopeParams& params);

struct NtkPreset {
  std::string family;
  std::int64_t window = 0;
  double base = 0;
  double factor = 0;
};

// Rows of data/ntk_presets.csv, compiled in.
const std::vector<NtkPreset>& ntk_presets();

// Parses the preset table format (comment lines start with '#', one header row).
std::vector<NtkPreset> parse_ntk_presets(const std::string& csv_text);

// Throws InputError("no preset ...") for unknown (family, window) pairs.
RopeParams ntk_preset(const std::string& family, std::int64_t target_window, int head_dim = 128);

}  // namespace longrecipe::rope
