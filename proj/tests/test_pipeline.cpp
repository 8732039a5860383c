#include <gtest/gtest.h>

#include <fstream>
#include <cmath>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "longrecipe/error.hpp"
#include "longrecipe/io.hpp"
#include "longrecipe/pipeline.hpp"

using namespace longrecipe;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RecipeConfig fixture_config(const fs::path& dir, std::size_t documents = 12) {
  const auto corpus = fixtures::make_corpus({.documents = documents, .seed = 3});
  fixtures::write_corpus_jsonl(corpus, dir / "corpus.jsonl");
  fixtures::write_logits_jsonl(fixtures::make_logit_dump(corpus, {.topk = 4}), dir / "logits.jsonl");
  RecipeConfig cfg;
  cfg.corpus = (dir / "corpus.jsonl").string();
  cfg.logits = (dir / "logits.jsonl").string();
  cfg.target_window = 4096;
  cfg.max_skip = 128;
  cfg.seed = 11;
  cfg.binary_dataset = true;
  cfg.histogram = true;
  cfg.output_dir = (dir / "out").string();
  return cfg;
}

}  // namespace

TEST(Analyze, MatchesInMemoryOracleAndReruns) {
  const auto dir = fixtures::scratch_dir("analyze");
  const auto corpus = fixtures::make_corpus({.documents = 1, .min_sentences = 5, .max_sentences = 5,
                                             .seed = 2});
  auto records = fixtures::make_logit_dump(corpus, {.integer_logits = true});
  records.resize(std::min<std::size_t>(records.size(), 100));
  fixtures::write_logits_jsonl(records, dir / "l.jsonl");
  RecipeConfig cfg;
  cfg.logits = (dir / "l.jsonl").string();
  const auto result = pipeline::run_analyze(cfg, dir / "a");
  std::map<std::string, double> want;
  for (const auto& r : records) want[r.pos_tag] += std::fabs(r.logit_ext - r.logit_base);
  EXPECT_EQ(result.table.delta, want);
  const auto first = slurp(dir / "a" / "significance.json");
  pipeline::run_analyze(cfg, dir / "a");
  EXPECT_EQ(slurp(dir / "a" / "significance.json"), first);
  EXPECT_EQ(json::parse(first).at("sample_count"), 1);
}

TEST(Analyze, EmptyDumpFailsWithoutOutputs) {
  const auto dir = fixtures::scratch_dir("analyze-empty");
  std::ofstream(dir / "empty.jsonl").close();
  RecipeConfig cfg;
  cfg.logits = (dir / "empty.jsonl").string();
  EXPECT_THROW(pipeline::run_analyze(cfg, dir / "a"), InputError);
  EXPECT_FALSE(fs::exists(dir / "a" / "anchors.json"));
  EXPECT_FALSE(fs::exists(dir / "a" / "significance.json"));
}

TEST(Pipeline, BudgetExactRecordsAndManifest) {
  const auto dir = fixtures::scratch_dir("pipeline");
  const auto cfg = fixture_config(dir);
  pipeline::run_pipeline(cfg);
  const fs::path out = cfg.output_dir;
  io::LineReader reader(out / "dataset.jsonl");
  std::string line;
  std::size_t n = 0;
  while (reader.next(line)) {
    const auto rec = io::dataset_record_from_json(json::parse(line));
    ASSERT_EQ(rec.token_ids.size(), 1229u);
    ASSERT_EQ(rec.plan.positions.size(), 1229u);
    ASSERT_LE(rec.plan.positions.back(), 4095u);
    ++n;
  }
  EXPECT_GT(n, 0u);

  const auto manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest.at("budget"), 1229);
  EXPECT_EQ(manifest.at("seed"), 11);
  EXPECT_EQ(manifest.at("config_sha256"), pipeline::sha256_hex(cfg.dump()));
  EXPECT_EQ(manifest.at("logit_source").at("kind"), "same_corpus");
  EXPECT_EQ(manifest.at("stages").at("synthesize").at("records"), n);
  std::set<std::string> listed;
  for (const auto& f : manifest.at("files")) {
    const std::string path = f.at("path");
    listed.insert(path);
    EXPECT_EQ(f.at("sha256"), pipeline::sha256_file(out / path)) << path;
  }
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), out).generic_string();
    if (rel == "manifest.json") continue;
    EXPECT_TRUE(listed.count(rel)) << rel;
    EXPECT_NE(e.path().extension(), ".partial") << rel;
  }
  EXPECT_TRUE(listed.count("analysis/diff_entropy.csv"));
}

TEST(Pipeline, RerunIsByteIdentical) {
  const auto dir = fixtures::scratch_dir("pipeline-rerun");
  auto cfg = fixture_config(dir);
  pipeline::run_pipeline(cfg);
  const auto a = slurp(dir / "out" / "manifest.json");
  const auto d = slurp(dir / "out" / "dataset.jsonl");
  cfg.output_dir = (dir / "out2").string();
  pipeline::run_pipeline(cfg);
  EXPECT_EQ(slurp(dir / "out2" / "manifest.json"), a);
  EXPECT_EQ(slurp(dir / "out2" / "dataset.jsonl"), d);
}

TEST(Pipeline, StageErrorsAreNamedAndQuarantined) {
  const auto dir = fixtures::scratch_dir("pipeline-bad");
  auto cfg = fixture_config(dir, 3);
  {
    std::ofstream app(cfg.corpus, std::ios::app);
    app << "{\"doc_id\": \"broken\", \"tokens\": 5}\n";
  }
  try {
    pipeline::run_pipeline(cfg);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("stage 'compact'"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(fs::exists(dir / "out" / "compact.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "compact.jsonl.partial"));
  EXPECT_FALSE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(Pipeline, SeedIsMandatory) {
  const auto dir = fixtures::scratch_dir("pipeline-seed");
  auto cfg = fixture_config(dir, 2);
  cfg.seed.reset();
  EXPECT_THROW(pipeline::run_pipeline(cfg), InputError);
}

TEST(Pipeline, LlamaRecipeBudget) {
  RecipeConfig cfg;
  cfg.target_window = 80000;
  cfg.model_family = "Llama3";
  EXPECT_EQ(cfg.budget(), 24000u);
}
