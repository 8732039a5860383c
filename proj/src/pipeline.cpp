#include "longrecipe/pipeline.hpp"

#include <omp.h>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "longrecipe/checkpoint.hpp"
#include "longrecipe/compaction.hpp"
#include "longrecipe/error.hpp"
#include "longrecipe/io.hpp"
#include "longrecipe/kernels.hpp"
#include "longrecipe/rope.hpp"
#include "longrecipe/synthesis.hpp"

namespace longrecipe::pipeline {

using nlohmann::json;

// ---- staged output ---------------------------------------------------------

StagedFile::StagedFile(fs::path path, bool binary)
    : path_(std::move(path)), partial_(path_.string() + ".partial") {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  out_.open(partial_, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  require_input(static_cast<bool>(out_), "cannot open " + partial_.string() + " for writing");
}

void StagedFile::commit() {
  if (committed_) return;
  out_.close();
  require_input(!out_.fail(), "failed writing " + partial_.string());
  fs::rename(partial_, path_);
  committed_ = true;
}

// ---- hashing ---------------------------------------------------------------

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require_invariant(EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) == 1,
                    "SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require_input(static_cast<bool>(in), "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in.read(buf.data(), static_cast<std::streamsize>(buf.size())) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char hx[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(hx, sizeof hx, "%02x", digest[i]);
    hex += hx;
  }
  return hex;
}

// ---- helpers ---------------------------------------------------------------

namespace {

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    throw InputError(std::string("stage '") + name + "': " + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(std::string("stage '") + name + "': " + e.what());
  } catch (const json::exception& e) {
    throw InputError(std::string("stage '") + name + "': malformed record: " + e.what());
  }
}

synthesis::SynthesisConfig synthesis_config(const RecipeConfig& cfg) {
  synthesis::SynthesisConfig s;
  s.max_skip = cfg.max_skip;
  s.convention = synthesis::parse_convention(cfg.convention);
  s.seed = cfg.require_seed();
  if (cfg.segment_source == "sentences") {
    s.segment_source = synthesis::SegmentSource::Sentences;
  } else if (cfg.segment_source == "random_chunks") {
    s.segment_source = synthesis::SegmentSource::RandomChunks;
  } else {
    throw InputError("unknown segment_source '" + cfg.segment_source + "'");
  }
  s.min_chunks = cfg.min_chunks;
  s.max_chunks = cfg.max_chunks;
  s.max_rejections = cfg.max_rejections;
  s.validate();
  return s;
}

std::vector<synthesis::Scheme> parse_scheme_list(const std::string& list) {
  std::vector<synthesis::Scheme> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(synthesis::parse_scheme(item));
  }
  require_input(!out.empty(), "no schemes listed");
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Runs body(i) for i in [0, n) across OpenMP workers; the first exception by
// index is rethrown afterwards.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void validate_config(const RecipeConfig& cfg) {
  require_input(cfg.token_ratio > 0 && cfg.token_ratio <= 1, "token_ratio must be in (0, 1]");
  require_input(cfg.top_fraction > 0 && cfg.top_fraction <= 1, "top_fraction must be in (0, 1]");
  require_input(cfg.replay_fraction > 0 && cfg.replay_fraction <= 1,
                "replay_fraction must be in (0, 1]");
  require_input(std::isfinite(cfg.lambda1) && std::isfinite(cfg.lambda2),
                "lambda1 and lambda2 must be finite");
  require_input(cfg.position_bin >= 1, "position_bin must be >= 1");
  require_input(cfg.anchor_count >= 1, "anchor_count must be >= 1");
  require_input(cfg.batch_size >= 1, "batch_size must be >= 1");
  require_input(cfg.epochs >= 1, "epochs must be >= 1");
  require_input(cfg.stats_plans_per_sample >= 1, "stats_plans_per_sample must be >= 1");
  require_input(cfg.anchor_rule == "mean_over_positions" || cfg.anchor_rule == "pooled",
                "anchor_rule must be mean_over_positions or pooled");
  impact::parse_group_by(cfg.group_by);
  compaction::parse_segment_unit(cfg.segment_unit);
  synthesis::parse_scheme(cfg.scheme);
  synthesis::parse_convention(cfg.convention);
  parse_scheme_list(cfg.compare_schemes);
  require_input(cfg.segment_source == "sentences" || cfg.segment_source == "random_chunks",
                "segment_source must be sentences or random_chunks");
  if (cfg.target_window > 0) {
    const auto budget = cfg.budget();
    require_input(cfg.source_window == 0 || cfg.source_window <= cfg.target_window,
                  "source_window exceeds target_window");
    (void)budget;
  }
  require_input(cfg.target_window >= 0 && cfg.source_window >= 0, "windows must be non-negative");

  std::map<std::string, std::string> seen;
  const std::pair<const char*, const std::string*> paths[] = {
      {"corpus", &cfg.corpus},   {"logits", &cfg.logits},         {"anchors", &cfg.anchors},
      {"compact", &cfg.compact}, {"dataset", &cfg.dataset},       {"output_dir", &cfg.output_dir},
      {"ckpt_a", &cfg.ckpt_a},   {"ckpt_b", &cfg.ckpt_b},         {"merged", &cfg.merged}};
  for (const auto& [key, value] : paths) {
    if (value->empty()) continue;
    const std::string norm = fs::path(*value).lexically_normal().string();
    const auto [it, fresh] = seen.emplace(norm, key);
    require_input(fresh, std::string("paths '") + it->second + "' and '" + key +
                             "' must differ (both " + norm + ")");
  }
}

// ---- analyze ---------------------------------------------------------------

AnalyzeResult run_analyze(const RecipeConfig& cfg, const fs::path& out_dir) {
  return stage("analyze", [&] {
    require_input(!cfg.logits.empty(), "no logit dump given (set 'logits')");
    const auto group_by = impact::parse_group_by(cfg.group_by);

    AnalyzeResult result;
    impact::SignificanceAccumulator acc(group_by);
    impact::TopFractionSelector selector(cfg.top_fraction, cfg.position_bin);
    std::map<std::uint32_t, std::pair<double, std::uint64_t>> entropy;

    impact::LogitRecord r;
    {
      io::LogitReader reader(cfg.logits);
      while (reader.next(r)) {
        acc.add(r);
        selector.count(r);
        result.dump_docs.insert(r.doc_id);
        if (!r.topk_diffs.empty()) {
          auto& e = entropy[r.position / cfg.position_bin];
          e.first += impact::diff_entropy(r.topk_diffs);
          ++e.second;
        }
      }
    }
    require_input(acc.record_count() > 0, "logit dump " + cfg.logits + " has no records");
    {
      io::LogitReader reader(cfg.logits);
      while (reader.next(r)) selector.offer(r);
    }

    result.table = acc.table();
    result.selection = std::move(selector).finish();
    result.profile = impact::pos_frequency_profile(result.selection);
    result.anchors = cfg.anchor_rule == "pooled"
                         ? impact::derive_anchors_pooled(result.selection, cfg.anchor_count)
                         : impact::derive_anchors(result.profile, cfg.anchor_count);

    std::uint64_t selected = 0;
    for (const auto& [bin, tokens] : result.selection) selected += tokens.size();
    result.counts = {{"records", result.table.record_count},
                     {"samples", result.table.sample_count},
                     {"token_types", result.table.delta.size()},
                     {"position_bins", result.selection.size()},
                     {"selected_tokens", selected},
                     {"anchors", result.anchors.pos_types.size()}};
    if (result.anchors.short_of_k) {
      std::cerr << "warning: only " << result.anchors.pos_types.size()
                << " POS labels observed, fewer than anchor_count=" << cfg.anchor_count << "\n";
    }

    fs::create_directories(out_dir);
    {
      json types = json::array();
      for (const auto& [type, delta] : result.table.ranked()) {
        types.push_back({{"type", type},
                         {"delta", delta},
                         {"occurrences", result.table.occurrences.at(type)}});
      }
      json report = {{"group_by", impact::to_string(group_by)},
                     {"sample_count", result.table.sample_count},
                     {"record_count", result.table.record_count},
                     {"top_fraction", cfg.top_fraction},
                     {"position_bin", cfg.position_bin},
                     {"types", std::move(types)}};
      StagedFile f(out_dir / "significance.json");
      f.stream() << report.dump(2) << '\n';
      f.commit();
    }
    {
      StagedFile f(out_dir / "significance.csv");
      f.stream() << "type,delta,occurrences\n";
      for (const auto& [type, delta] : result.table.ranked()) {
        f.stream() << type << ',' << num(delta) << ',' << result.table.occurrences.at(type) << '\n';
      }
      f.commit();
    }
    {
      StagedFile f(out_dir / "profile.csv");
      f.stream() << "bin,position_begin,position_end,pos_tag,frequency,selected\n";
      for (const auto& [bin, freq] : result.profile) {
        const auto n = result.selection.at(bin).size();
        for (const auto& [tag, v] : freq) {
          f.stream() << bin << ',' << std::uint64_t{bin} * cfg.position_bin << ','
                     << (std::uint64_t{bin} + 1) * cfg.position_bin << ',' << tag << ',' << num(v)
                     << ',' << n << '\n';
        }
      }
      f.commit();
    }
    {
      StagedFile f(out_dir / "anchors.json");
      f.stream() << io::anchors_to_json(result.anchors).dump(2) << '\n';
      f.commit();
    }
    if (!entropy.empty()) {
      StagedFile f(out_dir / "diff_entropy.csv");
      f.stream() << "bin,records,mean_entropy\n";
      for (const auto& [bin, e] : entropy) {
        f.stream() << bin << ',' << e.second << ',' << num(e.first / e.second) << '\n';
      }
      f.commit();
    }
    return result;
  });
}

// ---- compact ---------------------------------------------------------------

CompactResult run_compact(const RecipeConfig& cfg, const impact::AnchorSet& anchors,
                          const fs::path& out_path, const std::set<std::string>* dump_docs) {
  return stage("compact", [&] {
    require_input(!cfg.corpus.empty(), "no corpus given (set 'corpus')");
    require_input(!anchors.pos_types.empty(), "anchor set is empty");
    const std::uint32_t budget = cfg.budget();
    const auto unit = compaction::parse_segment_unit(cfg.segment_unit);

    enum class Outcome { Kept, NoAnchor, TooShort };
    struct Item {
      std::string line;
      std::uint64_t line_no = 0;
      Outcome outcome = Outcome::Kept;
      std::string doc_id;
      compaction::CompactSample sample;
    };

    CompactResult result;
    Counts& counts = result.counts;
    for (const char* k : {"documents", "compacted", "backfilled", "truncated",
                          "skipped_no_anchor", "skipped_short"}) {
      counts[k] = 0;
    }
    if (dump_docs) counts["in_logit_dump"] = 0;
    std::set<std::string> seen;

    io::LineReader reader{fs::path(cfg.corpus)};
    StagedFile out(out_path);
    std::vector<Item> batch;
    std::string line;
    bool more = true;
    while (more) {
      batch.clear();
      while (batch.size() < cfg.batch_size && (more = reader.next(line))) {
        Item item;
        item.line = std::move(line);
        item.line_no = reader.line_number();
        batch.push_back(std::move(item));
      }
      parallel_for(batch.size(), [&](std::size_t i) {
        Item& item = batch[i];
        const json j = io::parse_line(item.line, reader.source(), item.line_no);
        compaction::TokenizedDocument doc;
        try {
          doc = io::document_from_json(j, unit);
        } catch (const json::exception& e) {
          throw InputError(reader.source() + ":" + std::to_string(item.line_no) +
                           ": schema error: " + e.what());
        } catch (const InputError& e) {
          throw InputError(reader.source() + ":" + std::to_string(item.line_no) + ": " + e.what());
        }
        item.line.clear();
        item.doc_id = doc.doc_id;
        const auto kept = compaction::filter_by_anchors(doc, anchors);
        if (kept.empty()) {
          item.outcome = Outcome::NoAnchor;
        } else if (doc.tokens.size() < budget) {
          item.outcome = Outcome::TooShort;
        } else {
          item.sample = compaction::take_budget(doc, kept, budget);
          require_invariant(item.sample.tokens.size() == budget,
                            "compacted sample '" + doc.doc_id + "' missed its budget");
        }
      });
      for (auto& item : batch) {
        require_input(seen.insert(item.doc_id).second,
                      "duplicate doc_id '" + item.doc_id + "' in corpus");
        ++counts["documents"];
        result.corpus_doc_ids.push_back(item.doc_id);
        if (dump_docs && dump_docs->contains(item.doc_id)) ++counts["in_logit_dump"];
        switch (item.outcome) {
          case Outcome::NoAnchor: ++counts["skipped_no_anchor"]; continue;
          case Outcome::TooShort: ++counts["skipped_short"]; continue;
          case Outcome::Kept: break;
        }
        ++counts["compacted"];
        if (item.sample.backfilled()) ++counts["backfilled"];
        if (item.sample.truncated()) ++counts["truncated"];
        out.stream() << io::compact_to_json(item.sample).dump() << '\n';
      }
    }
    require_input(counts["documents"] > 0, "corpus " + cfg.corpus + " has no documents");
    out.commit();
    return result;
  });
}

// ---- synthesize ------------------------------------------------------------

Counts run_synthesize(const RecipeConfig& cfg, const fs::path& compact_path,
                      const fs::path& out_jsonl, const fs::path* out_bin) {
  return stage("synthesize", [&] {
    require_input(cfg.target_window >= 1, "target_window must be set");
    const auto scfg = synthesis_config(cfg);
    const auto scheme = synthesis::parse_scheme(cfg.scheme);
    const auto target = static_cast<std::uint64_t>(cfg.target_window);

    Counts counts = {{"samples", 0}, {"records", 0}, {"clamped", 0}};
    io::LineReader reader{compact_path};
    StagedFile out(out_jsonl);
    std::unique_ptr<StagedFile> bin;
    if (out_bin) {
      bin = std::make_unique<StagedFile>(*out_bin, true);
      io::write_dataset_binary_header(bin->stream());
    }

    std::vector<compaction::CompactSample> samples;
    std::vector<PlanRequest> requests;
    std::vector<std::vector<std::uint32_t>> token_ids;
    std::string line;
    bool more = true;
    while (more) {
      samples.clear();
      while (samples.size() < cfg.batch_size && (more = reader.next(line))) {
        const json j = io::parse_line(line, reader.source(), reader.line_number());
        samples.push_back(io::compact_from_json(j));
      }
      requests.clear();
      token_ids.assign(samples.size(), {});
      for (std::size_t i = 0; i < samples.size(); ++i) {
        for (const auto& t : samples[i].tokens) token_ids[i].push_back(t.id);
        for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
          requests.push_back({scheme, samples[i].doc_id, samples[i].segment_lengths, e});
        }
      }
      const auto plans = kernels::make_plans(requests, scfg, target);
      for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& plan = plans[i];
        synthesis::validate_plan(plan, scfg.max_skip, scfg.convention);
        const auto& ids = token_ids[i / cfg.epochs];
        out.stream() << io::plan_to_json(plan, ids).dump() << '\n';
        if (bin) io::write_dataset_binary(bin->stream(), plan, ids);
        ++counts["records"];
        if (plan.clamped) ++counts["clamped"];
      }
      counts["samples"] += samples.size();
    }
    out.commit();
    if (bin) bin->commit();
    return counts;
  });
}

// ---- stats -----------------------------------------------------------------

std::vector<metrics::SchemeRow> run_stats(const RecipeConfig& cfg, const fs::path& compact_path,
                                          const fs::path& out_csv, const fs::path* out_histogram) {
  return stage("stats", [&] {
    require_input(cfg.target_window >= 1, "target_window must be set");
    const auto schemes = parse_scheme_list(cfg.compare_schemes);
    std::vector<metrics::SampleShape> shapes;
    io::LineReader reader{compact_path};
    std::string line;
    while (reader.next(line)) {
      const json j = io::parse_line(line, reader.source(), reader.line_number());
      shapes.push_back({j.at("doc_id").get<std::string>(),
                        j.at("segment_lengths").get<std::vector<std::uint32_t>>()});
    }
    require_input(!shapes.empty(), "no samples in " + compact_path.string());

    metrics::CompareOptions options;
    options.synthesis = synthesis_config(cfg);
    options.target_window = static_cast<std::uint64_t>(cfg.target_window);
    options.plans_per_sample = cfg.stats_plans_per_sample;
    const auto rows = metrics::compare_schemes(shapes, schemes, options);
    {
      StagedFile f(out_csv);
      metrics::write_comparison_csv(f.stream(), rows);
      f.commit();
    }
    if (out_histogram) {
      StagedFile f(*out_histogram);
      f.stream() << "scheme,distance,count\n";
      for (auto scheme : schemes) {
        std::vector<std::uint64_t> total(options.target_window, 0);
        for (const auto& shape : shapes) {
          for (std::uint32_t e = 0; e < options.plans_per_sample; ++e) {
            const auto plan = synthesis::make_plan(scheme, shape.doc_id, shape.segment_lengths,
                                                   options.synthesis, options.target_window, e);
            const auto h = kernels::distance_histogram(plan.positions, options.target_window);
            for (std::size_t d = 0; d < h.size(); ++d) total[d] += h[d];
          }
        }
        metrics::write_histogram_csv(f.stream(), scheme, total);
      }
      f.commit();
    }
    return rows;
  });
}

// ---- merge -----------------------------------------------------------------

Counts run_merge(const RecipeConfig& cfg) {
  return stage("merge", [&] {
    require_input(!cfg.ckpt_a.empty() && !cfg.ckpt_b.empty() && !cfg.merged.empty(),
                  "merge needs ckpt_a, ckpt_b and merged paths");
    const auto a = checkpoint::read_checkpoint(cfg.ckpt_a);
    const auto b = checkpoint::read_checkpoint(cfg.ckpt_b);
    checkpoint::MergeSpec spec;
    spec.lambda1 = cfg.lambda1;
    spec.lambda2 = cfg.lambda2;
    spec.parent_a = fs::path(cfg.ckpt_a).filename().string();
    spec.parent_b = fs::path(cfg.ckpt_b).filename().string();
    const auto warnings = checkpoint::merge_warnings(spec);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const auto merged = checkpoint::merge(a, b, spec);

    const fs::path out_path = cfg.merged;
    {
      StagedFile f(out_path, true);
      const std::string bytes = checkpoint::serialize(merged);
      f.stream().write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      f.commit();
    }
    std::uint64_t elements = 0;
    for (const auto& [name, t] : merged.tensors) elements += t.data.size();
    json manifest = {
        {"schema", "longrecipe-merge-manifest/1"},
        {"lambda1", cfg.lambda1},
        {"lambda2", cfg.lambda2},
        {"parents",
         {{{"path", cfg.ckpt_a}, {"sha256", sha256_file(cfg.ckpt_a)}},
          {{"path", cfg.ckpt_b}, {"sha256", sha256_file(cfg.ckpt_b)}}}},
        {"output", {{"path", out_path.filename().string()}, {"sha256", sha256_file(out_path)}}},
        {"tensors", merged.tensors.size()},
        {"elements", elements},
        {"warnings", warnings}};
    StagedFile f(out_path.string() + ".manifest.json");
    f.stream() << manifest.dump(2) << '\n';
    f.commit();
    return Counts{{"tensors", merged.tensors.size()}, {"elements", elements}};
  });
}

// ---- full pipeline ---------------------------------------------------------

void run_pipeline(const RecipeConfig& cfg) {
  validate_config(cfg);
  const auto seed = cfg.require_seed();
  require_input(!cfg.output_dir.empty(), "output_dir must be set");
  require_input(cfg.target_window >= 1, "target_window must be set");
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);

  json stages = json::object();
  std::vector<fs::path> outputs;

  impact::AnchorSet anchors;
  std::set<std::string> dump_docs;
  const bool have_dump = !cfg.logits.empty();
  if (have_dump) {
    auto analysis = run_analyze(cfg, out / "analysis");
    anchors = analysis.anchors;
    dump_docs = std::move(analysis.dump_docs);
    stages["analyze"] = analysis.counts;
    for (const char* f : {"significance.json", "significance.csv", "profile.csv", "anchors.json",
                          "diff_entropy.csv"}) {
      if (fs::exists(out / "analysis" / f)) outputs.push_back(fs::path("analysis") / f);
    }
  } else {
    require_input(!cfg.anchors.empty(), "pipeline needs either 'logits' or 'anchors'");
    anchors = stage("analyze", [&] {
      io::LineReader reader{fs::path(cfg.anchors)};
      std::ostringstream text;
      std::string line;
      while (reader.next(line)) text << line << '\n';
      return io::anchors_from_json(json::parse(text.str()));
    });
    stages["analyze"] = {{"external_anchors", anchors.pos_types.size()}};
  }

  auto compacted = run_compact(cfg, anchors, out / "compact.jsonl", have_dump ? &dump_docs : nullptr);
  stages["compact"] = compacted.counts;
  outputs.emplace_back("compact.jsonl");

  const fs::path bin_path = out / "dataset.bin";
  stages["synthesize"] = run_synthesize(cfg, out / "compact.jsonl", out / "dataset.jsonl",
                                        cfg.binary_dataset ? &bin_path : nullptr);
  outputs.emplace_back("dataset.jsonl");
  if (cfg.binary_dataset) outputs.emplace_back("dataset.bin");

  if (compacted.counts["compacted"] > 0) {
    const fs::path hist_path = out / "histogram.csv";
    const auto rows = run_stats(cfg, out / "compact.jsonl", out / "stats.csv",
                                cfg.histogram ? &hist_path : nullptr);
    stages["stats"] = {{"schemes", rows.size()}};
    outputs.emplace_back("stats.csv");
    if (cfg.histogram) outputs.emplace_back("histogram.csv");
  }

  stages["replay"] = stage("replay", [&] {
    const auto replay =
        checkpoint::select_replay_subset(compacted.corpus_doc_ids, cfg.replay_fraction, seed);
    StagedFile f(out / "replay_ids.txt");
    for (const auto& id : replay) f.stream() << id << '\n';
    f.commit();
    return Counts{{"selected", replay.size()}, {"corpus_documents", compacted.corpus_doc_ids.size()}};
  });
  outputs.emplace_back("replay_ids.txt");

  json manifest;
  manifest["schema"] = "longrecipe-manifest/1";
  manifest["config"] = cfg.effective();
  manifest["config_sha256"] = sha256_hex(cfg.dump());
  manifest["seed"] = seed;
  manifest["budget"] = cfg.budget();
  manifest["stages"] = stages;
  if (have_dump) {
    const auto overlap = compacted.counts["in_logit_dump"];
    const auto docs = compacted.counts["documents"];
    manifest["logit_source"] = {
        {"dump_documents", dump_docs.size()},
        {"corpus_documents_in_dump", overlap},
        {"kind", overlap == 0 ? "held_out_probe" : (overlap == docs ? "same_corpus" : "partial_overlap")}};
  } else {
    manifest["logit_source"] = {{"kind", "external_anchors"}, {"anchors", cfg.anchors}};
  }
  if (!cfg.model_family.empty()) {
    const auto rope = rope::ntk_preset(cfg.model_family, cfg.target_window, cfg.head_dim);
    manifest["rope"] = {{"preset", *rope.preset_name},
                        {"base", rope.base},
                        {"factor", rope.factor.value_or(0.0)},
                        {"head_dim", rope.head_dim}};
  }
  json files = json::array();
  std::sort(outputs.begin(), outputs.end());
  for (const auto& rel : outputs) {
    files.push_back({{"path", rel.generic_string()},
                     {"bytes", fs::file_size(out / rel)},
                     {"sha256", sha256_file(out / rel)}});
  }
  manifest["files"] = std::move(files);
  StagedFile f(out / "manifest.json");
  f.stream() << manifest.dump(2) << '\n';
  f.commit();
}

}  // namespace longrecipe::pipeline
