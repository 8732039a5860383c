// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantities and runtime. Exit status is the number of failed criteria.
//
//   longrecipe_acceptance            all criteria
//   longrecipe_acceptance N [M ...]  only the listed ones

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "fixtures.hpp"
#include "longrecipe/checkpoint.hpp"
#include "longrecipe/compaction.hpp"
#include "longrecipe/config.hpp"
#include "longrecipe/error.hpp"
#include "longrecipe/impact.hpp"
#include "longrecipe/kernels.hpp"
#include "longrecipe/metrics.hpp"
#include "longrecipe/rng.hpp"
#include "longrecipe/rope.hpp"
#include "longrecipe/synthesis.hpp"

using namespace longrecipe;
namespace fs = std::filesystem;
using Lens = std::vector<std::uint32_t>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---- 1: RoPE -----------------------------------------------------------

Outcome rope_invariance() {
  std::mt19937_64 gen(1001);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> pos(0, 131072), dims(1, 64);
  double worst_shift = 0, worst_oracle = 0;
  for (int t = 0; t < 1000; ++t) {
    const int d = 2 * dims(gen);
    const rope::RopeParams p(d, t % 2 ? 10000.0 : 131.5e6);
    std::vector<double> q(d), k(d);
    for (auto& x : q) x = nd(gen);
    for (auto& x : k) x = nd(gen);
    const double m = pos(gen), n = pos(gen), c = pos(gen);
    const double s = rope::score(q, k, m, n, p);
    worst_shift = std::max(worst_shift, std::fabs(s - rope::score(q, k, m + c, n + c, p)));
    std::complex<long double> acc = 0;
    for (int i = 0; i < d / 2; ++i) {
      const long double th = std::pow(static_cast<long double>(p.base), -2.0L * i / d);
      acc += std::complex<long double>(q[2 * i], q[2 * i + 1]) *
             std::conj(std::complex<long double>(k[2 * i], k[2 * i + 1])) *
             std::polar(1.0L, (static_cast<long double>(m) - n) * th);
    }
    worst_oracle = std::max(worst_oracle, std::fabs(s - static_cast<double>(acc.real())));
  }
  return {worst_shift < 1e-9 && worst_oracle < 1e-9,
          "max |score(m,n)-score(m+c,n+c)| = " + fmt("%.3g", worst_shift) +
              ", max |score-complex oracle| = " + fmt("%.3g", worst_oracle) + " (tol 1e-9)"};
}

// ---- 2: synthesis invariants -------------------------------------------

Outcome synthesis_invariants() {
  std::mt19937_64 gen(2002);
  std::uint64_t violations = 0, validator_rejects = 0, clamped = 0;
  for (int t = 0; t < 10000; ++t) {
    const auto L = std::uniform_int_distribution<std::uint32_t>(1, 512)(gen);
    const auto window = std::uniform_int_distribution<std::uint64_t>(2 * L, 8192)(gen);
    synthesis::SynthesisConfig cfg;
    cfg.max_skip = std::uniform_int_distribution<std::uint32_t>(0, 400)(gen);
    cfg.convention = t % 2 ? synthesis::Convention::LiteralEq6 : synthesis::Convention::ContinuousAtZero;
    cfg.seed = gen();
    const std::string doc = "p" + std::to_string(t);
    synthesis::PositionPlan plan;
    if (t % 3 == 0) {
      cfg.segment_source = synthesis::SegmentSource::RandomChunks;
      cfg.max_chunks = 32;
      plan = synthesis::resample_plan(doc, L, cfg, window, t);
    } else {
      Rng rng(gen());
      const auto n = static_cast<std::uint32_t>(rng.uniform(1, std::min<std::uint32_t>(L, 64)));
      plan = synthesis::synthesize(doc, synthesis::random_chunks(L, n, rng), cfg, window);
    }
    clamped += plan.clamped;
    try {
      synthesis::validate_plan(plan, cfg.max_skip, cfg.convention);
    } catch (const InvariantError&) {
      ++validator_rejects;
    }
    // independent checks
    const auto& p = plan.positions;
    const std::uint32_t step = synthesis::junction_step(cfg.convention);
    bool ok = p.size() == L && !p.empty() && p[0] == 0 && p.back() < window;
    std::uint64_t seg_sum = 0;
    for (auto len : plan.segment_lengths) seg_sum += len;
    ok = ok && seg_sum == L && plan.gaps.size() + 1 == plan.segment_lengths.size();
    std::vector<std::vector<std::uint32_t>> seg_tokens;
    std::set<std::uint32_t> all_indices;
    std::size_t at = 0;
    for (std::size_t s = 0; ok && s < plan.segment_lengths.size(); ++s) {
      std::vector<std::uint32_t> toks;
      for (std::uint32_t k = 0; k < plan.segment_lengths[s]; ++k) {
        const std::size_t i = at + k;
        if (k > 0 && p[i] != p[i - 1] + 1) ok = false;
        if (!all_indices.insert(p[i]).second) ok = false;
        toks.push_back(static_cast<std::uint32_t>(i));
      }
      if (s > 0) {
        const std::uint32_t g = plan.gaps[s - 1];
        const std::uint64_t jump = p[at] - p[at - 1];
        if (g > cfg.max_skip || jump != std::uint64_t{g} + step + 1) ok = false;
      }
      seg_tokens.push_back(std::move(toks));
      at += plan.segment_lengths[s];
    }
    for (std::size_t i = 1; ok && i < p.size(); ++i) ok = p[i] > p[i - 1];
    std::vector<std::uint32_t> rebuilt;
    for (const auto& s : seg_tokens) rebuilt.insert(rebuilt.end(), s.begin(), s.end());
    for (std::size_t i = 0; ok && i < rebuilt.size(); ++i) ok = rebuilt[i] == i;
    ok = ok && rebuilt.size() == L;
    violations += !ok;
  }
  return {violations == 0 && validator_rejects == 0,
          "10000 plans: " + std::to_string(violations) + " violations, " +
              std::to_string(validator_rejects) + " validator rejections, " + std::to_string(clamped) +
              " used the clamp fallback"};
}

// ---- 3: coverage ------------------------------------------------------

// Pinned fixture: L_hat=64, L=16, M=16, literal convention, 2-8 random chunks.
Outcome distance_coverage() {
  synthesis::SynthesisConfig cfg;
  cfg.max_skip = 16;
  cfg.seed = 3003;
  cfg.segment_source = synthesis::SegmentSource::RandomChunks;
  std::set<std::uint32_t> ours_union, pose_union;
  double ours_per_plan = 0, pose_per_plan = 0;
  const int draws = 10000;
  for (int e = 0; e < draws; ++e) {
    const auto a = synthesis::resample_plan("cov", 16, cfg, 64, e);
    const auto b = synthesis::pose_plan(16, 64, derive_seed(cfg.seed, "cov", e));
    for (const auto* plan : {&a, &b}) {
      std::set<std::uint32_t> here;
      for (std::size_t i = 0; i < plan->positions.size(); ++i) {
        for (std::size_t j = i + 1; j < plan->positions.size(); ++j) {
          here.insert(plan->positions[j] - plan->positions[i]);
        }
      }
      (plan == &a ? ours_union : pose_union).insert(here.begin(), here.end());
      (plan == &a ? ours_per_plan : pose_per_plan) += here.size();
    }
  }
  ours_per_plan /= draws;
  pose_per_plan /= draws;
  const double coverage = ours_union.size() / 63.0;
  return {coverage >= 0.95 && ours_per_plan > pose_per_plan,
          "longrecipe covers " + std::to_string(ours_union.size()) + "/63 distances (" +
              fmt("%.1f", 100 * coverage) + "%, need >= 95%); distinct distances per plan " +
              fmt("%.2f", ours_per_plan) + " vs pose " + fmt("%.2f", pose_per_plan) +
              " (pose union " + std::to_string(pose_union.size()) + "/63)"};
}

// ---- 4: scheme comparison ---------------------------------------------

// Pinned fixture: L_hat=4096, budget 1229, M=128, literal convention,
// sentence segments from a compacted synthetic corpus; threshold 1.5.
Outcome scheme_comparison() {
  const std::uint64_t window = 4096;
  const auto budget = compaction::budget_for(0.3, window);
  const auto corpus =
      fixtures::make_corpus({.documents = 60, .min_sentences = 80, .max_sentences = 120, .seed = 4004});
  const auto dump = fixtures::make_logit_dump(corpus, {});
  const auto anchors = impact::derive_anchors(
      impact::pos_frequency_profile(impact::top_fraction_by_position(dump, 0.2)), 3);
  std::vector<compaction::CompactSample> samples;
  for (const auto& doc : corpus) {
    try {
      samples.push_back(compaction::compact(doc, anchors, budget));
    } catch (const InputError&) {
    }
  }
  if (samples.empty()) return {false, "no compacted samples"};

  synthesis::SynthesisConfig cfg;
  cfg.max_skip = 128;
  cfg.seed = 4004;
  std::map<synthesis::Scheme, std::vector<metrics::PlanStats>> stats;
  for (auto scheme : {synthesis::Scheme::LongRecipe, synthesis::Scheme::Pose, synthesis::Scheme::Rpes}) {
    std::vector<PlanRequest> req;
    for (std::size_t i = 0; i < 1000; ++i) {
      const auto& s = samples[i % samples.size()];
      req.push_back({scheme, s.doc_id, s.segment_lengths, i / samples.size()});
    }
    stats[scheme] = kernels::plan_stats(kernels::make_plans(req, cfg, window));
  }
  auto mean = [&](synthesis::Scheme s, double metrics::PlanStats::*field) {
    double acc = 0;
    for (const auto& p : stats[s]) acc += p.*field;
    return acc / stats[s].size();
  };
  const double d_ours = mean(synthesis::Scheme::LongRecipe, &metrics::PlanStats::avg_pairwise_distance);
  const double d_pose = mean(synthesis::Scheme::Pose, &metrics::PlanStats::avg_pairwise_distance);
  const double run_rpes = mean(synthesis::Scheme::Rpes, &metrics::PlanStats::avg_run_length);
  const double run_ours = mean(synthesis::Scheme::LongRecipe, &metrics::PlanStats::avg_run_length);
  const double sentence = fixtures::mean_sentence_length(corpus);
  const double ratio = d_ours / d_pose;
  const bool ratio_ok = ratio >= 1.5, rpes_ok = run_rpes < 1.3, ours_ok = run_ours >= sentence;
  std::string detail = "distance ratio vs pose " + fmt("%.3f", ratio) + (ratio_ok ? " (>= 1.5 ok)" : " (< 1.5)") +
                       "; rpes run length " + fmt("%.3f", run_rpes) +
                       (rpes_ok ? " (< 1.3 ok)" : " (NOT < 1.3; a uniform subset at L/L_hat=0.3 has expected run length ~1/(1-0.3)=1.43)") +
                       "; longrecipe run length " + fmt("%.2f", run_ours) + " vs mean sentence length " +
                       fmt("%.2f", sentence) + (ours_ok ? " (ok)" : " (too short)") + "; " +
                       std::to_string(samples.size()) + " samples";
  return {ratio_ok && rpes_ok && ours_ok, detail};
}

// ---- 5: significance oracle -------------------------------------------

Outcome significance_oracle() {
  const auto corpus =
      fixtures::make_corpus({.documents = 10, .min_sentences = 50, .max_sentences = 60, .seed = 5005});
  bool ok = true;
  std::string detail;
  for (bool integer : {true, false}) {
    auto records = fixtures::make_logit_dump(corpus, {.seed = 5, .integer_logits = integer});
    records.resize(std::min<std::size_t>(records.size(), 10000));
    std::map<std::string, long double> oracle;
    for (const auto& r : records) oracle[r.pos_tag] += std::fabs(static_cast<long double>(r.logit_ext) - r.logit_base);

    std::vector<impact::SignificanceTable> tables;
    tables.push_back(impact::significance_scores(records));
    tables.push_back(reference::significance(records, impact::GroupBy::PosTag));
    for (int threads : {1, 3, 8}) {
      omp_set_num_threads(threads);
      tables.push_back(kernels::significance(records, impact::GroupBy::PosTag));
    }
    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(integer));
    tables.push_back(impact::significance_scores(shuffled));
    // uneven shards merged in reverse
    std::vector<impact::SignificanceAccumulator> shards(7);
    for (std::size_t i = 0; i < shuffled.size(); ++i) shards[(i * i) % 7].add(shuffled[i]);
    impact::SignificanceAccumulator merged;
    for (auto it = shards.rbegin(); it != shards.rend(); ++it) merged.merge(*it);
    tables.push_back(merged.table());

    double worst = 0;
    for (const auto& t : tables) {
      if (t.delta.size() != oracle.size()) ok = false;
      for (const auto& [k, v] : oracle) {
        const auto it = t.delta.find(k);
        if (it == t.delta.end()) {
          ok = false;
          continue;
        }
        worst = std::max(worst, static_cast<double>(std::fabs(it->second - v)));
      }
    }
    const bool pass = integer ? worst == 0.0 : worst < 1e-9;
    ok = ok && pass;
    detail += std::string(integer ? "integer logits max err " : "; float logits max err ") + fmt("%.3g", worst);
    if (!integer) detail += " (" + std::to_string(records.size()) + " records, 7 tables each)";
  }
  omp_set_num_threads(1);
  return {ok, detail};
}

// ---- 6: softmax -------------------------------------------------------

Outcome softmax_validity() {
  const std::vector<double> hand{std::log(3.0), 0.0};
  const auto h = impact::diff_distribution(hand);
  const double hand_err = std::max(std::fabs(h[0] - 0.75), std::fabs(h[1] - 0.25));
  std::mt19937_64 gen(6006);
  std::uniform_real_distribution<double> u(-100, 100);
  double worst_sum = 0, worst_shift = 0;
  bool nonneg = true;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> d(std::uniform_int_distribution<int>(1, 200)(gen));
    for (auto& x : d) x = u(gen);
    const auto p = impact::diff_distribution(d);
    double s = 0;
    for (double x : p) {
      nonneg = nonneg && x >= 0;
      s += x;
    }
    worst_sum = std::max(worst_sum, std::fabs(s - 1));
    const double c = u(gen);
    for (auto& x : d) x += c;
    const auto q = impact::diff_distribution(d);
    for (std::size_t i = 0; i < p.size(); ++i) worst_shift = std::max(worst_shift, std::fabs(p[i] - q[i]));
  }
  return {hand_err < 1e-12 && nonneg && worst_sum < 1e-9 && worst_shift < 1e-9,
          "[ln 3, 0] error " + fmt("%.3g", hand_err) + "; max |sum-1| " + fmt("%.3g", worst_sum) +
              "; max shift delta " + fmt("%.3g", worst_shift) + "; non-negative " + (nonneg ? "yes" : "no")};
}

// ---- 7: compaction ----------------------------------------------------

Outcome compaction_exactness() {
  std::mt19937_64 gen(7007);
  const std::vector<std::string> tags{"NUM", "PRON", "AUX", "ADP", "X", "X", "X"};
  impact::AnchorSet anchors;
  anchors.pos_types = {"NUM", "PRON"};
  std::uint64_t ok_docs = 0, bad = 0, skipped = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t window = std::uniform_int_distribution<std::uint64_t>(64, 4096)(gen);
    const auto budget = compaction::budget_for(0.3, window);
    std::vector<compaction::Token> tokens;
    const auto sentences = std::uniform_int_distribution<int>(1, 150)(gen);
    for (int s = 0; s < sentences; ++s) {
      const auto words = std::uniform_int_distribution<int>(1, 30)(gen);
      for (int w = 0; w < words; ++w) {
        tokens.push_back({static_cast<std::uint32_t>(tokens.size()), "w",
                          tags[std::uniform_int_distribution<std::size_t>(0, tags.size() - 1)(gen)]});
      }
      tokens.push_back({static_cast<std::uint32_t>(tokens.size()), ".", "X"});
    }
    const auto doc = compaction::split_sentences("c" + std::to_string(t), tokens);
    compaction::CompactSample s;
    try {
      s = compaction::compact(doc, anchors, budget);
    } catch (const InputError&) {
      ++skipped;
      continue;
    }
    ++ok_docs;
    bool good = s.tokens.size() == std::llround(0.3 * static_cast<double>(window));
    for (auto sid : s.kept_sentence_ids) {
      if (s.truncated_sentence && *s.truncated_sentence == sid) continue;
      bool has = false;
      for (auto i = doc.sentences[sid].begin; i < doc.sentences[sid].end; ++i) {
        has = has || doc.tokens[i].pos_tag == "NUM" || doc.tokens[i].pos_tag == "PRON";
      }
      good = good && has;
    }
    for (std::size_t i = 1; i < s.tokens.size(); ++i) good = good && s.tokens[i - 1].id < s.tokens[i].id;
    bad += !good;
  }
  RecipeConfig llama;
  llama.target_window = 80000;
  llama.model_family = "Llama3";
  const auto b = llama.budget();
  const auto preset = rope::ntk_preset(llama.model_family, llama.target_window);
  return {bad == 0 && ok_docs > 0 && b == 24000 && preset.base == 48.9e6,
          std::to_string(ok_docs) + " compacted, " + std::to_string(bad) + " violations, " +
              std::to_string(skipped) + " too short; Llama3-80k budget " + std::to_string(b) +
              " (preset base " + fmt("%.4g", preset.base) + ")"};
}

// ---- 8: merge algebra -------------------------------------------------

Outcome merge_algebra() {
  std::mt19937_64 gen(8008);
  double worst_lin = 0;
  bool identity = true, symmetric = true, convex = true, roundtrip = true;
  for (std::size_t n : {std::size_t{1}, std::size_t{1000}, std::size_t{65536}, std::size_t{1000000}}) {
    checkpoint::CheckpointTensors a, b;
    for (int k = 0; k < 2; ++k) {
      std::normal_distribution<float> nd(0, k ? 100.0f : 0.02f);
      const std::size_t size = k ? std::max<std::size_t>(1, n / 10) : n;
      checkpoint::Tensor ta{{static_cast<std::int64_t>(size)}, std::vector<float>(size)}, tb = ta;
      for (auto& x : ta.data) x = nd(gen);
      for (auto& x : tb.data) x = nd(gen);
      a.tensors["t" + std::to_string(k)] = std::move(ta);
      b.tensors["t" + std::to_string(k)] = std::move(tb);
    }
    identity = identity && checkpoint::merge(a, b, {1.0, 0.0}).tensors == a.tensors;
    symmetric = symmetric && checkpoint::merge(a, b).tensors == checkpoint::merge(b, a).tensors;
    std::uniform_real_distribution<double> lam(-1, 1);
    const double l1 = lam(gen), l2 = lam(gen), m1 = lam(gen), m2 = lam(gen);
    const auto x = checkpoint::merge(a, b, {l1, l2}), y = checkpoint::merge(a, b, {m1, m2}),
               z = checkpoint::merge(a, b, {l1 + m1, l2 + m2});
    const double c1 = std::uniform_real_distribution<double>(0, 1)(gen);
    const auto cv = checkpoint::merge(a, b, {c1, 1 - c1});
    for (const auto& [name, ta] : a.tensors) {
      const auto& tb = b.tensors.at(name);
      for (std::size_t i = 0; i < ta.data.size(); ++i) {
        const double scale = 1 + std::fabs(ta.data[i]) + std::fabs(tb.data[i]);
        worst_lin = std::max(worst_lin, std::fabs(double{x.tensors.at(name).data[i]} + y.tensors.at(name).data[i] -
                                                  z.tensors.at(name).data[i]) / scale);
        const float v = cv.tensors.at(name).data[i];
        convex = convex && v >= std::min(ta.data[i], tb.data[i]) && v <= std::max(ta.data[i], tb.data[i]);
      }
    }
    const auto bytes = checkpoint::serialize(a);
    roundtrip = roundtrip && checkpoint::serialize(checkpoint::deserialize(bytes)) == bytes;
  }
  return {identity && symmetric && convex && roundtrip && worst_lin < 1e-6,
          std::string("identity ") + (identity ? "ok" : "FAIL") + ", symmetry " + (symmetric ? "ok" : "FAIL") +
              ", convex bound " + (convex ? "ok" : "FAIL") + ", round-trip " + (roundtrip ? "ok" : "FAIL") +
              ", max relative linearity error " + fmt("%.3g", worst_lin) + " (tol 1e-6)"};
}

// ---- 9: pipeline determinism -------------------------------------------

Outcome pipeline_determinism() {
  const auto dir = fixtures::scratch_dir("acceptance-determinism");
  const auto corpus = fixtures::make_corpus({.documents = 24, .seed = 9009});
  fixtures::write_corpus_jsonl(corpus, dir / "corpus.jsonl");
  fixtures::write_logits_jsonl(fixtures::make_logit_dump(corpus, {}), dir / "logits.jsonl");
  std::ofstream(dir / "recipe.cfg") << "schema_version = 1\ncorpus = " << (dir / "corpus.jsonl").string()
                                    << "\nlogits = " << (dir / "logits.jsonl").string()
                                    << "\ntarget_window = 4096\nmax_skip = 128\nseed = 9009\n"
                                       "binary_dataset = true\nhistogram = true\nbatch_size = 5\n";
  std::vector<std::string> outs;
  for (auto [name, workers] : {std::pair{"run1", "1"}, {"run2", "1"}, {"run8", "8"}}) {
    const auto r = fixtures::run_process({LONGRECIPE_CLI_PATH, "pipeline", "--config", (dir / "recipe.cfg").string(),
                                          "--output-dir", (dir / name).string()},
                                         {std::string("LONGRECIPE_WORKERS=") + workers});
    if (r.exit_code != 0) return {false, std::string(name) + " exited " + std::to_string(r.exit_code) + ": " + r.output};
    outs.push_back(name);
  }
  std::vector<std::string> differing;
  std::size_t compared = 0;
  for (const char* f : {"dataset.jsonl", "dataset.bin", "stats.csv", "histogram.csv", "manifest.json"}) {
    const auto ref = slurp(dir / outs[0] / f);
    for (std::size_t i = 1; i < outs.size(); ++i) {
      ++compared;
      if (slurp(dir / outs[i] / f) != ref || ref.empty()) differing.push_back(outs[i] + "/" + f);
    }
  }
  std::string detail = std::to_string(compared) + " file comparisons across 2 runs x 1 worker and 1 run x 8 workers";
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty(), detail};
}

// ---- 10: closed-form distance -------------------------------------------

Outcome distance_closed_form() {
  std::mt19937_64 gen(10010);
  double worst = 0;
  std::uint64_t plans = 0;
  synthesis::SynthesisConfig cfg;
  cfg.seed = 10;
  for (int t = 0; t < 4000; ++t) {
    const auto L = std::uniform_int_distribution<std::uint32_t>(2, 512)(gen);
    const auto window = std::uniform_int_distribution<std::uint64_t>(2 * L, 1 << 16)(gen);
    cfg.max_skip = std::uniform_int_distribution<std::uint32_t>(0, 2000)(gen);
    const auto scheme = static_cast<synthesis::Scheme>(t % 4);
    Rng rng(gen());
    const auto segs = synthesis::random_chunks(L, static_cast<std::uint32_t>(rng.uniform(1, std::min(L, 40u))), rng);
    const auto plan = synthesis::make_plan(scheme, "d" + std::to_string(t), segs, cfg, window);
    long double brute = 0;
    const auto& p = plan.positions;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = i + 1; j < p.size(); ++j) brute += p[j] - p[i];
    }
    brute /= static_cast<long double>(p.size()) * (p.size() - 1) / 2;
    const double closed = metrics::avg_pairwise_distance(p);
    worst = std::max(worst, static_cast<double>(std::fabs(closed - brute) / std::max(1.0L, brute)));
    ++plans;
  }
  const double id10 = metrics::avg_pairwise_distance(synthesis::identity_plan(10, 10).positions);
  return {worst < 1e-9 && id10 == 11.0 / 3.0,
          std::to_string(plans) + " plans, max relative error " + fmt("%.3g", worst) +
              "; identity L=10 gives " + fmt("%.17g", id10) + (id10 == 11.0 / 3.0 ? " == 11/3" : " != 11/3")};
}

}  // namespace

int main(int argc, char** argv) {
  omp_set_num_threads(1);
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  struct Criterion {
    int id;
    const char* name;
    double limit_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "RoPE relative invariance", 5, rope_invariance},
      {2, "synthesis invariants", 30, synthesis_invariants},
      {3, "distance coverage", 30, distance_coverage},
      {4, "scheme distance / run length", 60, scheme_comparison},
      {5, "significance oracle", 10, significance_oracle},
      {6, "softmax validity", 0, softmax_validity},
      {7, "compaction exactness", 0, compaction_exactness},
      {8, "merge algebra", 20, merge_algebra},
      {9, "pipeline determinism", 0, pipeline_determinism},
      {10, "closed-form distance", 0, distance_closed_form},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::string timing = fmt("%.2fs", secs);
    if (c.limit_s > 0) timing += fmt(" of %.0fs", c.limit_s);
    std::printf("criterion %2d %s  %s: %s [%s]\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed;
}
