#include "longrecipe/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "longrecipe/compaction.hpp"
#include "longrecipe/error.hpp"

namespace longrecipe {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  require_input(ec == std::errc() && ptr == end, "config key '" + key + "': cannot parse '" +
                                                     text + "' as a number");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InputError("config key '" + key + "': expected true/false, got '" + text + "'");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RecipeConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RecipeConfig&)> get;
  bool output_path = false;
};

template <typename T>
Field field(T RecipeConfig::*member, bool output_path = false) {
  Field f;
  f.output_path = output_path;
  f.set = [member](RecipeConfig& c, const std::string& key, const std::string& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      c.*member = v;
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*member = parse_bool(key, v);
    } else {
      c.*member = parse_number<T>(key, v);
    }
  };
  f.get = [member](const RecipeConfig& c) -> std::string {
    if constexpr (std::is_same_v<T, std::string>) {
      return c.*member;
    } else if constexpr (std::is_same_v<T, bool>) {
      return c.*member ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
      return fmt_double(c.*member);
    } else {
      return std::to_string(c.*member);
    }
  };
  return f;
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["source_window"] = field(&RecipeConfig::source_window);
    t["target_window"] = field(&RecipeConfig::target_window);
    t["token_ratio"] = field(&RecipeConfig::token_ratio);
    t["top_fraction"] = field(&RecipeConfig::top_fraction);
    t["position_bin"] = field(&RecipeConfig::position_bin);
    t["group_by"] = field(&RecipeConfig::group_by);
    t["anchor_count"] = field(&RecipeConfig::anchor_count);
    t["anchor_rule"] = field(&RecipeConfig::anchor_rule);
    t["segment_unit"] = field(&RecipeConfig::segment_unit);
    t["scheme"] = field(&RecipeConfig::scheme);
    t["max_skip"] = field(&RecipeConfig::max_skip);
    t["convention"] = field(&RecipeConfig::convention);
    t["segment_source"] = field(&RecipeConfig::segment_source);
    t["min_chunks"] = field(&RecipeConfig::min_chunks);
    t["max_chunks"] = field(&RecipeConfig::max_chunks);
    t["max_rejections"] = field(&RecipeConfig::max_rejections);
    t["epochs"] = field(&RecipeConfig::epochs);
    t["binary_dataset"] = field(&RecipeConfig::binary_dataset);
    t["compare_schemes"] = field(&RecipeConfig::compare_schemes);
    t["stats_plans_per_sample"] = field(&RecipeConfig::stats_plans_per_sample);
    t["histogram"] = field(&RecipeConfig::histogram);
    t["lambda1"] = field(&RecipeConfig::lambda1);
    t["lambda2"] = field(&RecipeConfig::lambda2);
    t["replay_fraction"] = field(&RecipeConfig::replay_fraction);
    t["model_family"] = field(&RecipeConfig::model_family);
    t["head_dim"] = field(&RecipeConfig::head_dim);
    t["batch_size"] = field(&RecipeConfig::batch_size);
    t["corpus"] = field(&RecipeConfig::corpus);
    t["logits"] = field(&RecipeConfig::logits);
    t["anchors"] = field(&RecipeConfig::anchors);
    t["compact"] = field(&RecipeConfig::compact);
    t["dataset"] = field(&RecipeConfig::dataset);
    t["output_dir"] = field(&RecipeConfig::output_dir, true);
    t["ckpt_a"] = field(&RecipeConfig::ckpt_a);
    t["ckpt_b"] = field(&RecipeConfig::ckpt_b);
    t["merged"] = field(&RecipeConfig::merged, true);
    Field seed;
    seed.set = [](RecipeConfig& c, const std::string& key, const std::string& v) {
      c.seed = parse_number<std::uint64_t>(key, v);
    };
    seed.get = [](const RecipeConfig& c) { return c.seed ? std::to_string(*c.seed) : ""; };
    t["seed"] = seed;
    return t;
  }();
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RecipeConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  require_input(it != fields().end(), "unknown config key '" + key + "'");
  it->second.set(*this, key, value);
}

std::map<std::string, std::string> RecipeConfig::effective(bool include_output_paths) const {
  std::map<std::string, std::string> out;
  for (const auto& [key, f] : fields()) {
    if (f.output_path && !include_output_paths) continue;
    out[key] = f.get(*this);
  }
  out["schema_version"] = std::to_string(kConfigSchemaVersion);
  return out;
}

std::string RecipeConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : effective()) out += k + " = " + v + "\n";
  return out;
}

std::uint32_t RecipeConfig::budget() const {
  require_input(target_window >= 1, "target_window must be set");
  return compaction::budget_for(token_ratio, target_window);
}

std::uint64_t RecipeConfig::require_seed() const {
  require_input(seed.has_value(), "seed is mandatory (set 'seed' in the config or --seed)");
  return *seed;
}

const std::vector<std::string>& RecipeConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [key, f] : fields()) out.push_back(key);
    return out;
  }();
  return k;
}

RecipeConfig parse_config(const std::string& text, const std::string& source) {
  RecipeConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool versioned = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require_input(eq != std::string::npos,
                  source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "schema_version") {
        require_input(value == std::to_string(kConfigSchemaVersion),
                      "unsupported schema_version " + value);
        versioned = true;
      } else {
        cfg.set(key, value);
      }
    } catch (const InputError& e) {
      throw InputError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  require_input(versioned, source + ": missing 'schema_version = " +
                               std::to_string(kConfigSchemaVersion) + "'");
  return cfg;
}

RecipeConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require_input(static_cast<bool>(in), "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace longrecipe
