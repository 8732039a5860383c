#include "longrecipe/rope.hpp"

#include <cmath>
#include <sstream>

#include "longrecipe/error.hpp"
#include "ntk_presets_data.hpp"

namespace longrecipe::rope {

RopeParams::RopeParams(int head_dim_, double base_) : head_dim(head_dim_), base(base_) {
  require_input(head_dim >= 2 && head_dim % 2 == 0,
                "RoPE head dimension must be even and >= 2, got " + std::to_string(head_dim));
  require_input(std::isfinite(base) && base > 1.0, "RoPE base must be > 1");
}

double theta(int i, const RopeParams& params) {
  require_input(i >= 0 && i < params.pair_count(),
                "RoPE frequency index " + std::to_string(i) + " out of range [0, " +
                    std::to_string(params.pair_count()) + ")");
  if (i == 0) return 1.0;
  return std::pow(params.base, -2.0 * i / params.head_dim);
}

std::vector<double> theta_table(const RopeParams& params) {
  std::vector<double> out(params.pair_count());
  for (int i = 0; i < params.pair_count(); ++i) out[i] = theta(i, params);
  return out;
}

HeadVector apply(std::span<const double> v, double position, const RopeParams& params) {
  require_input(v.size() % 2 == 0, "RoPE input vector must have even length");
  require_input(v.size() == static_cast<std::size_t>(params.head_dim),
                "RoPE input length " + std::to_string(v.size()) + " != head_dim " +
                    std::to_string(params.head_dim));
  HeadVector out(v.size());
  for (int i = 0; i < params.pair_count(); ++i) {
    const double angle = position * theta(i, params);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double x = v[2 * i];
    const double y = v[2 * i + 1];
    out[2 * i] = x * c - y * s;
    out[2 * i + 1] = x * s + y * c;
  }
  return out;
}

double score(std::span<const double> q, std::span<const double> k, double m, double n,
             const RopeParams& params) {
  require_input(q.size() == k.size(), "RoPE score: query/key length mismatch");
  const HeadVector qm = apply(q, m, params);
  const HeadVector kn = apply(k, n, params);
  double acc = 0.0;
  for (std::size_t i = 0; i < qm.size(); ++i) acc += qm[i] * kn[i];
  return acc;
}

std::vector<NtkPreset> parse_ntk_presets(const std::string& csv_text) {
  std::vector<NtkPreset> rows;
  std::istringstream in(csv_text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      require_input(line == "family,window,base,factor", "bad NTK preset header: " + line);
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    NtkPreset p;
    std::string window, base, factor;
    if (!std::getline(fields, p.family, ',') || !std::getline(fields, window, ',') ||
        !std::getline(fields, base, ',') || !std::getline(fields, factor, ',')) {
      throw InputError("malformed NTK preset row: " + line);
    }
    p.window = std::stoll(window);
    p.base = std::stod(base);
    p.factor = std::stod(factor);
    rows.push_back(std::move(p));
  }
  return rows;
}

const std::vector<NtkPreset>& ntk_presets() {
  static const std::vector<NtkPreset> table = parse_ntk_presets(std::string(kNtkPresetsCsv));
  return table;
}

RopeParams ntk_preset(const std::string& family, std::int64_t target_window, int head_dim) {
  for (const auto& p : ntk_presets()) {
    if (p.family == family && p.window == target_window) {
      RopeParams params(head_dim, p.base);
      params.preset_name = p.family + "-" + std::to_string(p.window);
      params.factor = p.factor;
      return params;
    }
  }
  throw InputError("no preset for model family '" + family + "' at window " +
                   std::to_string(target_window));
}

}  // namespace longrecipe::rope
