// Acceptance suite: runs every mandatory criterion at its pinned tolerance and
// prints one PASS/FAIL line each. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "advprobe/dataset_builder.hpp"
#include "advprobe/extraction.hpp"
#include "advprobe/metrics.hpp"
#include "advprobe/probes.hpp"
#include "advprobe/scale_ranking.hpp"
#include "advprobe/sha256.hpp"
#include "advprobe/text.hpp"
#include "support/oracles.hpp"
#include "support/paths.hpp"

using namespace advprobe;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    if (!pass) ++failures;
}

void info(const std::string& id, const std::string& detail) {
    std::printf("[INFO] %s: %s\n", id.c_str(), detail.c_str());
}

struct Fixture {
    Lexicon lexicon;
    std::vector<EntailmentTemplate> templates;
    AdjectivePool pool;

    Fixture()
        : lexicon(testsupport::load_lexicon()),
          templates(load_templates(testsupport::data_dir() / "templates.tsv")),
          pool(AdjectivePool::load(testsupport::data_dir() / "adjective_pool.tsv")) {}
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// C1: random baseline over the full default dataset, accuracy 0.48 +- 0.03 and
// trivial rate 0.13 +- 0.03, under a minute, no model.
void criterion_random_baseline(const Fixture& fx) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto items = generate_entailment(fx.templates, fx.pool, fx.lexicon);
    const EntailmentResult r =
        run_random_baseline(items, fx.templates, fx.lexicon, 20220101, NegVariant::WITH_NEG);
    const double elapsed = seconds_since(t0);

    const double accuracy = r.overall.accuracy().value_or(-1.0);
    const double trivial = r.overall.trivial_rate().value_or(-1.0);
    const double accuracy_all_answers =
        static_cast<double>(r.overall.correct) / r.overall.classified();

    const bool acc_ok = accuracy >= 0.45 && accuracy <= 0.51;
    const bool triv_ok = trivial >= 0.10 && trivial <= 0.16;
    const bool time_ok = elapsed < 60.0;
    std::ostringstream detail;
    detail << "accuracy=" << fmt(accuracy) << " (target 0.48+-0.03), trivial=" << fmt(trivial)
           << " (target 0.13+-0.03), items=" << items.size() << ", " << fmt(elapsed) << "s";
    detail << "; correct/all-answers=" << fmt(accuracy_all_answers);
    report("C1 random-baseline", acc_ok && triv_ok && time_ok, detail.str());
}

// C2: the four metrics match brute-force oracles to 1e-9 on 1000 seeded
// instances of sizes 3-8 with ties.
void criterion_metric_oracles() {
    Rng rng(1000003);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const oracles::Instance in = oracles::random_instance(rng);
        const metrics::RankComparison cmp{in.gold, in.predicted};
        worst = std::max(worst,
                         std::abs(metrics::pairwise_accuracy(cmp) -
                                  static_cast<double>(oracles::oracle_pairwise_accuracy(in))));
        worst = std::max(worst, std::abs(metrics::spearman_rho(cmp) -
                                         static_cast<double>(oracles::oracle_spearman(in))));
        worst = std::max(worst, std::abs(metrics::kendall_tau_b(cmp) -
                                         static_cast<double>(oracles::oracle_kendall_tau_b(in))));
        std::vector<int> ranks;
        for (size_t k = 0; k < in.gold.size(); ++k) {
            ranks.push_back(1 + static_cast<int>(rng.below(1000)));
        }
        worst = std::max(worst, std::abs(metrics::mean_reciprocal_rank(ranks) -
                                         static_cast<double>(oracles::oracle_mrr(ranks))));
    }
    std::ostringstream detail;
    detail << "1000 instances, max |delta| = " << std::scientific << worst << " (tol 1e-9)";
    report("C2 metric-oracle-equivalence", worst < 1e-9, detail.str());
}

// C3: SIM, DIFF and AdjDIFF each recover every category exactly on the
// planted-embedding provider, in under ten seconds.
void criterion_synthetic_ranking(const Fixture& fx) {
    const auto t0 = std::chrono::steady_clock::now();
    const SyntheticEmbeddingProvider provider(fx.lexicon, 16);
    const ScaleRanker ranker(fx.lexicon, provider,
                             load_frame_adjectives(testsupport::data_dir() /
                                                   "frame_adjectives.txt"));
    bool ok = true;
    std::ostringstream detail;
    for (RankMethod m : {RankMethod::SIM, RankMethod::DIFF, RankMethod::ADJDIFF}) {
        for (ScaleCategory c : kAllCategories) {
            const RankingEvaluation eval = ranker.evaluate(ranker.rank(m, c));
            if (std::abs(eval.spearman_rho - 1.0) > 1e-9 ||
                std::abs(eval.pairwise_accuracy - 1.0) > 1e-9) {
                ok = false;
                detail << to_string(m) << "/" << to_string(c) << " rho=" << fmt(eval.spearman_rho)
                       << " pacc=" << fmt(eval.pairwise_accuracy) << "; ";
            }
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 10.0) ok = false;
    detail << "9 method-category pairs, rho=1 pacc=1, " << fmt(elapsed) << "s";
    report("C3 synthetic-ranking-oracle", ok, detail.str());
}

// C4: generation invariants: exact product count, one mask per item, exact
// NLI balance, byte-identical regeneration under a fixed seed.
void criterion_generation_invariants(const Fixture& fx) {
    const auto items = generate_entailment(fx.templates, fx.pool, fx.lexicon);
    const size_t below = eligible_premises(fx.lexicon, Condition::BELOW).size();
    const size_t above = eligible_premises(fx.lexicon, Condition::ABOVE).size();
    const size_t expected = 8 * fx.pool.entries.size() * (below + above);
    bool ok = items.size() == expected;
    std::ostringstream detail;
    detail << "count=" << items.size() << " (expected " << expected << ", " << below << "+"
           << above << " premises)";

    size_t bad_masks = 0;
    for (const EntailmentItem& it : items) {
        if (text::count_occurrences(it.surface, kMaskToken) != 1) ++bad_masks;
    }
    if (bad_masks != 0) ok = false;
    detail << ", bad_masks=" << bad_masks;

    NliBuildStats stats;
    const auto pairs = to_nli(items, fx.templates, fx.lexicon, 13, &stats);
    std::map<std::pair<int, int>, std::pair<int, int>> balance;
    for (const NliPair& p : pairs) {
        const ScalarAdverb& prem = fx.lexicon.lookup(p.premise_adverb);
        auto& [ent, con] = balance[{static_cast<int>(*prem.category),
                                    static_cast<int>(p.condition)}];
        (p.label == NliLabel::ENTAILMENT ? ent : con)++;
    }
    bool balanced = true;
    for (const auto& [key, counts] : balance) balanced &= counts.first == counts.second;
    if (!balanced) ok = false;
    detail << ", nli_pairs=" << pairs.size() << (balanced ? " balanced" : " UNBALANCED");

    testsupport::TempDir tmp;
    write_entailment_jsonl(tmp.file("a.jsonl"), items);
    write_entailment_jsonl(tmp.file("b.jsonl"),
                           generate_entailment(fx.templates, fx.pool, fx.lexicon));
    write_nli_jsonl(tmp.file("na.jsonl"), pairs);
    write_nli_jsonl(tmp.file("nb.jsonl"), to_nli(items, fx.templates, fx.lexicon, 13));
    const bool regen_identical =
        sha256_file_hex(tmp.file("a.jsonl")) == sha256_file_hex(tmp.file("b.jsonl")) &&
        sha256_file_hex(tmp.file("na.jsonl")) == sha256_file_hex(tmp.file("nb.jsonl"));
    if (!regen_identical) ok = false;
    detail << (regen_identical ? ", regeneration byte-identical" : ", REGENERATION DIFFERS");
    report("C4 generation-invariants", ok, detail.str());
}

// C5: extraction over the shipped 50-comment fixture reproduces the annotated
// item set exactly.
void criterion_extraction_fixture(const Fixture& fx) {
    const auto corpus =
        read_comments_jsonl(testsupport::fixtures_dir() / "comments_fixture.jsonl");
    const RuleParseProvider provider(fx.lexicon);
    const auto items = extract_items(corpus, fx.lexicon, provider);
    const auto expected = read_items_jsonl(testsupport::fixtures_dir() / "expected_items.jsonl");
    size_t mismatches = items.size() == expected.size() ? 0 : 1;
    if (mismatches == 0) {
        for (size_t i = 0; i < items.size(); ++i) {
            const ProbeItem& a = items[i];
            const ProbeItem& b = expected[i];
            if (a.source_id != b.source_id || a.context != b.context || a.adverb != b.adverb ||
                a.adjective != b.adjective || a.mask_start != b.mask_start ||
                a.mask_end != b.mask_end || a.word_count != b.word_count) {
                ++mismatches;
            }
        }
    }
    std::ostringstream detail;
    detail << corpus.size() << " comments -> " << items.size() << " items (expected "
           << expected.size() << "), mismatches=" << mismatches << " (tolerance 0)";
    report("C5 extraction-fixture", mismatches == 0, detail.str());
}

// C6: target-first mock yields MRR 1.0 and beat-not 1.0; not-first mock yields
// beat-not 0.0.
void criterion_mock_mlm(const Fixture& fx) {
    const auto probe_items =
        read_items_jsonl(testsupport::fixtures_dir() / "expected_items.jsonl");
    const auto instances = build_mlm_items(probe_items);
    std::vector<std::pair<std::string, std::string>> text_targets;
    for (const MaskedInstance& m : instances) text_targets.push_back({m.text_with_mask, m.target});

    const MaskGateway target_first(
        make_mock_masked_lm(text_targets, fx.lexicon, MockBehavior::TARGET_FIRST));
    const MlmResult a = run_mlm_probe(instances, target_first, fx.lexicon);
    bool ok = !a.aggregates.empty();
    double mrr = 0.0, beat = 0.0;
    for (const MlmAggregate& agg : a.aggregates) {
        mrr = agg.overall.mrr;
        beat = agg.overall.beat_not_accuracy;
        ok = ok && agg.overall.mrr == 1.0 && agg.overall.beat_not_accuracy == 1.0;
    }

    const MaskGateway not_first(
        make_mock_masked_lm(text_targets, fx.lexicon, MockBehavior::NOT_FIRST));
    const MlmResult b = run_mlm_probe(instances, not_first, fx.lexicon);
    double beat_not_first = 1.0;
    for (const MlmAggregate& agg : b.aggregates) {
        beat_not_first = agg.overall.beat_not_accuracy;
        ok = ok && agg.overall.beat_not_accuracy == 0.0;
    }
    std::ostringstream detail;
    detail << "target-first: MRR=" << fmt(mrr) << " beat-not=" << fmt(beat)
           << "; not-first: beat-not=" << fmt(beat_not_first) << " (targets 1.0/1.0 and 0.0)";
    report("C6 mock-mlm", ok, detail.str());
}

// C8: identical config, data and seeds reproduce identical verdict files.
void criterion_determinism(const Fixture& fx) {
    AdjectivePool small;
    for (size_t i = 0; i < fx.pool.entries.size(); i += 8) {
        small.entries.push_back(fx.pool.entries[i]);
    }
    const auto items = generate_entailment(fx.templates, small, fx.lexicon);
    testsupport::TempDir tmp;
    write_entailment_verdicts_jsonl(
        tmp.file("r1.jsonl"),
        run_random_baseline(items, fx.templates, fx.lexicon, 31337).verdicts);
    write_entailment_verdicts_jsonl(
        tmp.file("r2.jsonl"),
        run_random_baseline(items, fx.templates, fx.lexicon, 31337).verdicts);

    const auto probe_items =
        read_items_jsonl(testsupport::fixtures_dir() / "expected_items.jsonl");
    const auto instances = build_mlm_items(probe_items);
    std::vector<std::pair<std::string, std::string>> text_targets;
    for (const MaskedInstance& m : instances) text_targets.push_back({m.text_with_mask, m.target});
    const MaskGateway gateway(
        make_mock_masked_lm(text_targets, fx.lexicon, MockBehavior::FREQUENCY));
    write_mlm_verdicts_jsonl(tmp.file("m1.jsonl"),
                             run_mlm_probe(instances, gateway, fx.lexicon).verdicts);
    write_mlm_verdicts_jsonl(tmp.file("m2.jsonl"),
                             run_mlm_probe(instances, gateway, fx.lexicon).verdicts);

    const std::string h_r1 = sha256_file_hex(tmp.file("r1.jsonl"));
    const std::string h_r2 = sha256_file_hex(tmp.file("r2.jsonl"));
    const std::string h_m1 = sha256_file_hex(tmp.file("m1.jsonl"));
    const std::string h_m2 = sha256_file_hex(tmp.file("m2.jsonl"));
    const bool ok = h_r1 == h_r2 && h_m1 == h_m2;
    std::ostringstream detail;
    detail << "random-baseline verdict hash " << h_r1.substr(0, 12)
           << (h_r1 == h_r2 ? " == " : " != ") << h_r2.substr(0, 12) << "; mlm verdict hash "
           << h_m1.substr(0, 12) << (h_m1 == h_m2 ? " == " : " != ") << h_m2.substr(0, 12);
    report("C8 determinism", ok, detail.str());
}

} // namespace

int main() {
    try {
        const Fixture fx;
        criterion_random_baseline(fx);
        criterion_metric_oracles();
        criterion_synthetic_ranking(fx);
        criterion_generation_invariants(fx);
        criterion_extraction_fixture(fx);
        criterion_mock_mlm(fx);
        info("C7 large-model-run",
             "optional, not CI-gated: serve the published checkpoints over the model-server "
             "protocol or the Python bindings and compare against the reference tables (see "
             "README)");
        criterion_determinism(fx);
    } catch (const std::exception& e) {
        std::printf("[FAIL] acceptance harness error: %s\n", e.what());
        return 2;
    }
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
