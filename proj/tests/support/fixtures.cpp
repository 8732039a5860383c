#include "fixtures.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <fcntl.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

#include "longrecipe/io.hpp"
#include "longrecipe/rng.hpp"

namespace longrecipe::fixtures {

namespace {

const std::vector<std::string>& content_words() {
  static const std::vector<std::string> words = {
      "river",  "model",   "window", "signal",  "market", "engine", "garden", "letter",
      "report", "station", "budget", "history", "theory", "bridge", "forest", "camera",
      "energy", "policy",  "season", "museum",  "orbit",  "sample", "vector", "record",
      "north",  "quiet",   "rapid",  "bright",  "narrow", "formal", "built",  "moved",
      "opened", "carried", "noted",  "studied", "found",  "raised", "shaped", "joined"};
  return words;
}

const std::vector<std::string>& function_words() {
  static const std::vector<std::string> words = {"it",  "they", "this", "is", "was", "has",
                                                 "in",  "of",   "with", "and", "but", "or",
                                                 "we",  "can",  "from"};
  return words;
}

std::uint32_t vocab_id(const std::string& word) {
  return static_cast<std::uint32_t>(fnv1a64(word) % 50000);
}

}  // namespace

std::vector<compaction::TokenizedDocument> make_corpus(const CorpusSpec& spec) {
  std::vector<compaction::TokenizedDocument> corpus;
  for (std::size_t d = 0; d < spec.documents; ++d) {
    const std::string doc_id = "doc-" + std::to_string(d);
    Rng rng(derive_seed(spec.seed, doc_id));
    std::vector<compaction::Token> tokens;
    const auto sentences = rng.uniform(spec.min_sentences, spec.max_sentences);
    for (std::uint64_t s = 0; s < sentences; ++s) {
      const auto words = rng.uniform(spec.min_words, spec.max_words);
      for (std::uint64_t w = 0; w < words; ++w) {
        std::string word;
        const double u = rng.unit();
        if (u < spec.numeral_rate) {
          word = std::to_string(rng.uniform(0, 2100));
        } else if (u < spec.numeral_rate + 0.30) {
          word = function_words()[rng.uniform(0, function_words().size() - 1)];
        } else {
          word = content_words()[rng.uniform(0, content_words().size() - 1)];
        }
        tokens.push_back({vocab_id(word), word, impact::fixture_tag(word)});
      }
      tokens.push_back({vocab_id("."), ".", impact::fixture_tag(".")});
    }
    corpus.push_back(compaction::split_sentences(doc_id, std::move(tokens)));
  }
  return corpus;
}

std::vector<impact::LogitRecord> make_logit_dump(
    const std::vector<compaction::TokenizedDocument>& corpus, const DumpSpec& spec) {
  std::vector<impact::LogitRecord> out;
  for (const auto& doc : corpus) {
    Rng rng(derive_seed(spec.seed, doc.doc_id));
    for (std::uint32_t i = 0; i < doc.tokens.size(); ++i) {
      const auto& t = doc.tokens[i];
      double scale = 0.3;
      if (t.pos_tag == "NUM") scale = 4.0;
      else if (t.pos_tag == "PRON" || t.pos_tag == "AUX") scale = 1.6;
      else if (t.pos_tag == "CCONJ" || t.pos_tag == "ADP") scale = 1.2;
      impact::LogitRecord r;
      r.doc_id = doc.doc_id;
      r.position = i;
      r.token_id = t.id;
      r.pos_tag = t.pos_tag;
      double base = rng.unit() * 20.0 - 10.0;
      double shift = (rng.unit() * 2.0 - 1.0) * scale;
      if (spec.integer_logits) {
        base = std::round(base);
        shift = std::round(shift * 4.0);
      }
      r.logit_base = base;
      r.logit_ext = base + shift;
      for (std::size_t k = 0; k < spec.topk; ++k) {
        r.topk_diffs.emplace_back(static_cast<std::uint32_t>(k == 0 ? t.id : 50000 + k),
                                  k == 0 ? shift : rng.unit() * 2.0 - 1.0);
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_corpus_jsonl(const std::vector<compaction::TokenizedDocument>& corpus,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  for (const auto& doc : corpus) {
    auto j = io::document_to_json(doc);
    j.erase("sentence_bounds");  // re-derived from delimiters on load
    out << j.dump() << '\n';
  }
}

void write_logits_jsonl(const std::vector<impact::LogitRecord>& records,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  for (const auto& r : records) out << io::logit_to_json(r).dump() << '\n';
}

void write_logits_binary(const std::vector<impact::LogitRecord>& records,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  io::write_logit_binary_header(out);
  for (const auto& r : records) io::write_logit_binary(out, r);
}

double mean_sentence_length(const std::vector<compaction::TokenizedDocument>& corpus) {
  std::uint64_t tokens = 0, sentences = 0;
  for (const auto& doc : corpus) {
    tokens += doc.tokens.size();
    sentences += doc.sentences.size();
  }
  return static_cast<double>(tokens) / static_cast<double>(sentences);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("longrecipe-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::vector<std::string>& extra_env) {
  char tmpl[] = "/tmp/longrecipe-proc-XXXXXX";
  const int fd = ::mkstemp(tmpl);
  if (fd < 0) throw std::runtime_error("mkstemp failed");

  std::vector<std::string> env_store;
  for (char** e = environ; *e; ++e) {
    const std::string entry = *e;
    bool overridden = false;
    for (const auto& x : extra_env) {
      if (entry.substr(0, entry.find('=') + 1) == x.substr(0, x.find('=') + 1)) overridden = true;
    }
    if (!overridden) env_store.push_back(entry);
  }
  env_store.insert(env_store.end(), extra_env.begin(), extra_env.end());
  std::vector<char*> envp, args;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);
  std::vector<std::string> argv_store = argv;
  for (auto& a : argv_store) args.push_back(a.data());
  args.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fd, 1);
  posix_spawn_file_actions_adddup2(&actions, fd, 2);
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, args[0], &actions, nullptr, args.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  ::close(fd);
  if (rc != 0) {
    std::filesystem::remove(tmpl);
    throw std::runtime_error("posix_spawn failed for " + argv[0]);
  }
  int status = 0;
  struct rusage usage {};
  ::wait4(pid, &status, 0, &usage);

  ProcessResult out;
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  out.max_rss_kb = usage.ru_maxrss;
  std::ifstream in(tmpl);
  out.output.assign(std::istreambuf_iterator<char>(in), {});
  std::filesystem::remove(tmpl);
  return out;
}

}  // namespace longrecipe::fixtures
