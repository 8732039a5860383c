// Command-line front end: analyze, compact, synthesize, stats, merge, pipeline.
//
// Every subcommand accepts --config FILE plus one --<key> option per config
// key (underscores written as dashes); flags override file values. Exit
// codes: 0 success, 1 input error, 2 internal invariant violation.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "longrecipe/config.hpp"
#include "longrecipe/error.hpp"
#include "longrecipe/io.hpp"
#include "longrecipe/kernels.hpp"
#include "longrecipe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace longrecipe;

namespace {

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

Command add_command(CLI::App& root, const std::string& name, const std::string& description) {
  Command cmd;
  cmd.app = root.add_subcommand(name, description);
  return cmd;
}

void add_config_options(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_path, "Recipe config file (key = value)");
  for (const auto& key : RecipeConfig::keys()) {
    std::string flag = "--" + key;
    for (auto& c : flag) {
      if (c == '_') c = '-';
    }
    cmd.app->add_option_function<std::string>(
        flag, [&cmd, key](const std::string& v) { cmd.overrides[key] = v; },
        "Override config key '" + key + "'");
  }
}

RecipeConfig resolve(const Command& cmd) {
  RecipeConfig cfg = cmd.config_path.empty() ? RecipeConfig{} : load_config(cmd.config_path);
  for (const auto& [k, v] : cmd.overrides) cfg.set(k, v);
  return cfg;
}

void print_counts(const std::string& stage, const pipeline::Counts& counts) {
  std::cout << stage << ":";
  for (const auto& [k, v] : counts) std::cout << " " << k << "=" << v;
  std::cout << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"longrecipe: long-context training data recipes"};
  app.require_subcommand(1);

  auto analyze = add_command(app, "analyze", "Significance scores, POS profile and anchors from a logit dump");
  auto compact = add_command(app, "compact", "Anchor-filtered, budget-exact samples from a corpus");
  auto synthesize = add_command(app, "synthesize", "Position-index dataset from compacted samples");
  auto stats = add_command(app, "stats", "Distance / run-length comparison across schemes");
  auto merge = add_command(app, "merge", "Weighted merge of two checkpoints");
  auto full = add_command(app, "pipeline", "analyze -> compact -> synthesize -> stats, with manifest");
  for (Command* c : {&analyze, &compact, &synthesize, &stats, &merge, &full}) add_config_options(*c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const int workers = configure_workers();
  (void)workers;

  if (*analyze.app) {
    const auto cfg = resolve(analyze);
    pipeline::validate_config(cfg);
    require_input(!cfg.output_dir.empty(), "output_dir must be set");
    const auto result = pipeline::run_analyze(cfg, cfg.output_dir);
    print_counts("analyze", result.counts);
    std::cout << "anchors:";
    for (const auto& t : result.anchors.pos_types) std::cout << " " << t;
    std::cout << "\n";
  } else if (*compact.app) {
    const auto cfg = resolve(compact);
    pipeline::validate_config(cfg);
    require_input(!cfg.anchors.empty(), "anchors file must be set");
    require_input(!cfg.compact.empty(), "compact output path must be set");
    io::LineReader reader{fs::path(cfg.anchors)};
    std::string text, line;
    while (reader.next(line)) text += line + "\n";
    const auto anchors = io::anchors_from_json(nlohmann::json::parse(text));
    print_counts("compact", pipeline::run_compact(cfg, anchors, cfg.compact).counts);
  } else if (*synthesize.app) {
    const auto cfg = resolve(synthesize);
    pipeline::validate_config(cfg);
    cfg.require_seed();
    require_input(!cfg.compact.empty() && !cfg.dataset.empty(),
                  "synthesize needs 'compact' input and 'dataset' output paths");
    const fs::path bin = fs::path(cfg.dataset).replace_extension(".bin");
    print_counts("synthesize", pipeline::run_synthesize(cfg, cfg.compact, cfg.dataset,
                                                        cfg.binary_dataset ? &bin : nullptr));
  } else if (*stats.app) {
    const auto cfg = resolve(stats);
    pipeline::validate_config(cfg);
    cfg.require_seed();
    require_input(!cfg.compact.empty() && !cfg.output_dir.empty(),
                  "stats needs 'compact' input and 'output_dir'");
    const fs::path dir = cfg.output_dir;
    const fs::path hist = dir / "histogram.csv";
    const auto rows = pipeline::run_stats(cfg, cfg.compact, dir / "stats.csv",
                                          cfg.histogram ? &hist : nullptr);
    metrics::write_comparison_csv(std::cout, rows);
  } else if (*merge.app) {
    const auto cfg = resolve(merge);
    pipeline::validate_config(cfg);
    print_counts("merge", pipeline::run_merge(cfg));
  } else if (*full.app) {
    const auto cfg = resolve(full);
    pipeline::run_pipeline(cfg);
    std::cout << "pipeline: outputs in " << cfg.output_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
