#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "longrecipe/compaction.hpp"
#include "longrecipe/impact.hpp"

namespace longrecipe::fixtures {

struct CorpusSpec {
  std::size_t documents = 20;
  std::uint32_t min_sentences = 40;
  std::uint32_t max_sentences = 80;
  std::uint32_t min_words = 6;
  std::uint32_t max_words = 30;
  // Chance that a word slot becomes a numeral.
  double numeral_rate = 0.04;
  std::uint64_t seed = 1;
};

// Synthetic English-like documents, tagged with impact::fixture_tag and
// segmented on their sentence-final "." tokens.
std::vector<compaction::TokenizedDocument> make_corpus(const CorpusSpec& spec);

struct DumpSpec {
  std::uint64_t seed = 7;
  bool integer_logits = false;
  std::size_t topk = 0;  // > 0 adds top-k diff lists
};

// One record per token. Logit shifts are largest for NUM, then PRON/AUX,
// then CCONJ/ADP, then everything else.
std::vector<impact::LogitRecord> make_logit_dump(
    const std::vector<compaction::TokenizedDocument>& corpus, const DumpSpec& spec);

void write_corpus_jsonl(const std::vector<compaction::TokenizedDocument>& corpus,
                        const std::filesystem::path& path);
void write_logits_jsonl(const std::vector<impact::LogitRecord>& records,
                        const std::filesystem::path& path);
void write_logits_binary(const std::vector<impact::LogitRecord>& records,
                         const std::filesystem::path& path);

double mean_sentence_length(const std::vector<compaction::TokenizedDocument>& corpus);

struct ProcessResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
  long max_rss_kb = 0;
};

// Runs argv[0] with the given arguments and extra environment entries
// ("KEY=VALUE"), waiting for it to exit.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::vector<std::string>& extra_env = {});

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace longrecipe::fixtures
