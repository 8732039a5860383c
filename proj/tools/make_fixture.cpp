// Writes a synthetic tagged corpus and matching logit dump for trying the
// pipeline without real model outputs.
//
//   longrecipe_fixture OUT_DIR [documents] [seed]

#include <filesystem>
#include <iostream>
#include <string>

#include "fixtures.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: " << argv[0] << " OUT_DIR [documents] [seed]\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  longrecipe::fixtures::CorpusSpec spec;
  if (argc > 2) spec.documents = std::stoul(argv[2]);
  if (argc > 3) spec.seed = std::stoull(argv[3]);
  std::filesystem::create_directories(dir);
  const auto corpus = longrecipe::fixtures::make_corpus(spec);
  longrecipe::fixtures::write_corpus_jsonl(corpus, dir / "corpus.jsonl");
  const auto dump = longrecipe::fixtures::make_logit_dump(corpus, {});
  longrecipe::fixtures::write_logits_jsonl(dump, dir / "logits.jsonl");
  std::cout << "wrote " << corpus.size() << " documents and " << dump.size() << " logit records to "
            << dir << "\n";
  return 0;
}
