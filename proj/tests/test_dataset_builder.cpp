#include <doctest.h>

#include <map>
#include <set>

#include "advprobe/dataset_builder.hpp"
#include "advprobe/errors.hpp"
#include "advprobe/text.hpp"
#include "support/paths.hpp"

using namespace advprobe;
using testsupport::TempDir;

namespace {

const Lexicon& lex() {
    static Lexicon lexicon = testsupport::load_lexicon();
    return lexicon;
}

std::vector<EntailmentTemplate> templates() {
    return load_templates(testsupport::data_dir() / "templates.tsv");
}

AdjectivePool pool() { return AdjectivePool::load(testsupport::data_dir() / "adjective_pool.tsv"); }

} // namespace

TEST_CASE("masked instances pair full context with a neutral frame") {
    ProbeItem item;
    item.source_id = "c01";
    item.context =
        "Fairly certain the charter says exceptions are allowed, and this entire situation is "
        "definitely exceptional.";
    item.adverb = "definitely";
    item.adjective = "exceptional";
    item.mask_start = item.context.find("definitely");
    item.mask_end = item.mask_start + 10;
    item.word_count = 15;

    const auto instances = build_mlm_items({item});
    REQUIRE(instances.size() == 2);
    CHECK(instances[0].variant == Variant::FULL_CONTEXT);
    CHECK(instances[0].text_with_mask ==
          "Fairly certain the charter says exceptions are allowed, and this entire situation is "
          "[MASK] exceptional.");
    CHECK(instances[0].target == "definitely");
    CHECK(instances[1].variant == Variant::NEUTRAL);
    CHECK(instances[1].text_with_mask == "is [MASK] exceptional.");
    CHECK(text::count_occurrences(instances[0].text_with_mask, kMaskToken) == 1);
}

TEST_CASE("neutral frame is the bare copula string") {
    ProbeItem item;
    item.source_id = "c03";
    item.context = "Most I know are quite empathetic.";
    item.adverb = "quite";
    item.adjective = "empathetic";
    item.mask_start = item.context.find("quite");
    item.mask_end = item.mask_start + 5;
    const auto instances = build_mlm_items({item});
    REQUIRE(instances.size() == 2);
    CHECK(instances[1].text_with_mask == "is [MASK] empathetic.");
}

TEST_CASE("items with broken mask spans are rejected with a diagnostic") {
    ProbeItem bad;
    bad.source_id = "x";
    bad.context = "This is very strange.";
    bad.adverb = "very";
    bad.mask_start = 3;
    bad.mask_end = 3; // zero length
    MlmBuildStats stats;
    const auto instances = build_mlm_items({bad}, &stats);
    CHECK(instances.empty());
    CHECK(stats.rejected == 1);
}

TEST_CASE("templates load with derived directions") {
    const auto ts = templates();
    REQUIRE(ts.size() == 16);
    for (const EntailmentTemplate& t : ts) {
        if (t.id <= 8) {
            CHECK(t.condition == Condition::BELOW);
            CHECK(t.expected_direction == ScaleOrder::BELOW);
        } else if (t.id <= 15) {
            CHECK(t.condition == Condition::ABOVE);
            CHECK(t.expected_direction == ScaleOrder::ABOVE);
        } else {
            // template 16 sits in the ABOVE block but its "at most {MASK}"
            // bound entails a completion below the premise
            CHECK(t.condition == Condition::ABOVE);
            CHECK(t.expected_direction == ScaleOrder::BELOW);
        }
    }
    CHECK(template_by_id(ts, 2).mask_position == MaskPosition::BEFORE_PREMISE);
    CHECK(template_by_id(ts, 13).mask_position == MaskPosition::AFTER_PREMISE);
    CHECK(template_by_id(ts, 5).polarity_frame == PolarityFrame::AT_MOST_NEGATED);
    CHECK(template_by_id(ts, 10).polarity_frame == PolarityFrame::AT_LEAST);
}

TEST_CASE("paper-exact flag restores the printed wording of template 16") {
    auto ts = templates();
    apply_paper_exact(ts);
    const EntailmentTemplate& t16 = template_by_id(ts, 16);
    CHECK(t16.pattern == "It not {PREMISE} {ADJ} because it is at most {MASK} {ADJ}.");
    CHECK(t16.expected_direction == ScaleOrder::BELOW);
}

TEST_CASE("template instantiation matches the reference example") {
    const auto ts = templates();
    AdjectivePool single;
    single.entries.push_back({"cold", FreqBin::HIGH, -8.4});
    // restrict to one premise to keep the product tiny
    EligibilityOptions opts;
    for (const ScalarAdverb* a : lex().targets()) {
        if (a->surface != "often") {
            opts.extra_excluded_below.insert(a->surface);
            opts.extra_excluded_above.insert(a->surface);
        }
    }
    std::vector<EntailmentTemplate> t1 = {template_by_id(ts, 1)};
    // pad with the rest of the BELOW templates so validation of count logic
    // stays simple: generate directly instead
    const auto items = generate_entailment(t1, single, lex(), opts);
    REQUIRE(items.size() == 1);
    CHECK(items[0].surface == "If it is often cold, then it is at least [MASK] cold.");
    CHECK(items[0].premise == "often");
    CHECK(items[0].bin == FreqBin::HIGH);
}

TEST_CASE("eligible premises follow the exclusion rules") {
    const auto below = eligible_premises(lex(), Condition::BELOW);
    const auto above = eligible_premises(lex(), Condition::ABOVE);
    auto contains = [](const std::vector<const ScalarAdverb*>& v, const std::string& s) {
        return std::any_of(v.begin(), v.end(),
                           [&](const ScalarAdverb* a) { return a->surface == s; });
    };
    CHECK(below.size() == 17);
    CHECK(above.size() == 19);
    CHECK_FALSE(contains(below, "sometimes"));
    CHECK_FALSE(contains(below, "maybe"));
    CHECK_FALSE(contains(below, "perhaps"));
    CHECK_FALSE(contains(below, "possibly"));
    CHECK_FALSE(contains(below, "slightly"));
    CHECK_FALSE(contains(above, "completely"));
    CHECK_FALSE(contains(above, "always"));
    CHECK_FALSE(contains(above, "definitely"));
    CHECK_FALSE(contains(below, "never"));
    CHECK_FALSE(contains(above, "never"));
    CHECK_FALSE(contains(below, "hardly"));
    CHECK_FALSE(contains(above, "hardly"));
    CHECK(contains(below, "occasionally"));
    CHECK(contains(above, "maybe"));
}

TEST_CASE("adjective pool validates bins") {
    const AdjectivePool p = pool();
    std::map<FreqBin, int> counts;
    for (const PoolEntry& e : p.entries) counts[e.bin]++;
    CHECK(counts[FreqBin::PSEUDO] == 40);
    CHECK(counts[FreqBin::LOW] == 40);
    CHECK(counts[FreqBin::MED] == 40);
    CHECK(counts[FreqBin::HIGH] == 40);

    TempDir tmp;
    testsupport::spit(tmp.file("bad.tsv"), "gloomy\tLOW\t-11.8\n");
    CHECK_THROWS_AS(AdjectivePool::load(tmp.file("bad.tsv")), ValidationError);
    testsupport::spit(tmp.file("pseudo.tsv"), "blorfic\tPSEUDO\t-12.0\n");
    CHECK_THROWS_AS(AdjectivePool::load(tmp.file("pseudo.tsv")), ValidationError);
}

TEST_CASE("log-frequency bins are half-open") {
    CHECK(bin_for_log_freq(-18.0) == FreqBin::LOW);
    CHECK(bin_for_log_freq(-14.0) == FreqBin::MED);
    CHECK(bin_for_log_freq(-14.0001) == FreqBin::LOW);
    CHECK(bin_for_log_freq(-10.0) == FreqBin::HIGH);
    CHECK(bin_for_log_freq(-6.0) == std::nullopt);
    CHECK(bin_for_log_freq(-18.0001) == std::nullopt);
}

TEST_CASE("entailment generation is the exact eligibility product") {
    const auto ts = templates();
    const AdjectivePool p = pool();
    const auto items = generate_entailment(ts, p, lex());
    const size_t below = eligible_premises(lex(), Condition::BELOW).size();
    const size_t above = eligible_premises(lex(), Condition::ABOVE).size();
    CHECK(items.size() == 8 * p.entries.size() * (below + above));
    CHECK(items.size() == 46080);
    for (size_t i = 0; i < items.size(); i += 997) {
        CHECK(text::count_occurrences(items[i].surface, kMaskToken) == 1);
    }
    std::set<std::string> ids;
    for (const EntailmentItem& it : items) ids.insert(it.id);
    CHECK(ids.size() == items.size());
}

TEST_CASE("generation and serialization are deterministic") {
    const auto ts = templates();
    AdjectivePool small;
    for (size_t i = 0; i < 40; ++i) small.entries.push_back(pool().entries[i]); // pseudo bin
    const auto a = generate_entailment(ts, small, lex());
    const auto b = generate_entailment(ts, small, lex());
    REQUIRE(a.size() == b.size());
    TempDir tmp;
    write_entailment_jsonl(tmp.file("a.jsonl"), a);
    write_entailment_jsonl(tmp.file("b.jsonl"), b);
    CHECK(testsupport::slurp(tmp.file("a.jsonl")) == testsupport::slurp(tmp.file("b.jsonl")));
}

TEST_CASE("NLI conversion balances every category and condition") {
    const auto ts = templates();
    const auto items = generate_entailment(ts, pool(), lex());
    NliBuildStats stats;
    const auto pairs = to_nli(items, ts, lex(), 99, &stats);
    CHECK(stats.skipped_no_filler == 0);
    CHECK(stats.dropped_for_balance == 0);
    CHECK(pairs.size() == items.size());

    std::map<std::pair<int, int>, std::pair<int, int>> balance; // (cat, cond) -> (ent, con)
    for (const NliPair& p : pairs) {
        const ScalarAdverb& prem = lex().lookup(p.premise_adverb);
        const auto key = std::make_pair(static_cast<int>(*prem.category),
                                        static_cast<int>(p.condition));
        if (p.label == NliLabel::ENTAILMENT) balance[key].first++;
        else balance[key].second++;
        // label is consistent with the gold comparison of the two sentences
        const ScaleOrder order = lex().compare(p.hypothesis_adverb, p.premise_adverb);
        if (p.label == NliLabel::ENTAILMENT) CHECK(order == ScaleOrder::BELOW);
        else CHECK(order == ScaleOrder::ABOVE);
        CHECK(p.premise_sentence == "It is " + p.premise_adverb + " " + p.adjective + ".");
        CHECK(p.hypothesis_sentence == "It is " + p.hypothesis_adverb + " " + p.adjective + ".");
    }
    for (const auto& [key, counts] : balance) {
        CHECK(counts.first == counts.second);
    }
}

TEST_CASE("NLI conversion is seed-deterministic") {
    const auto ts = templates();
    AdjectivePool small;
    for (size_t i = 120; i < 160; ++i) small.entries.push_back(pool().entries[i]);
    const auto items = generate_entailment(ts, small, lex());
    TempDir tmp;
    write_nli_jsonl(tmp.file("a.jsonl"), to_nli(items, ts, lex(), 7));
    write_nli_jsonl(tmp.file("b.jsonl"), to_nli(items, ts, lex(), 7));
    write_nli_jsonl(tmp.file("c.jsonl"), to_nli(items, ts, lex(), 8));
    CHECK(testsupport::slurp(tmp.file("a.jsonl")) == testsupport::slurp(tmp.file("b.jsonl")));
    CHECK(testsupport::slurp(tmp.file("a.jsonl")) != testsupport::slurp(tmp.file("c.jsonl")));
}

TEST_CASE("reference NLI pair labels") {
    // "It is always cold." entails "It is sometimes cold."; the reverse
    // ordering is labeled a contradiction.
    const auto ts = templates();
    std::vector<EntailmentItem> items;
    for (const std::string adjective : {"cold", "warm"}) {
        EntailmentItem it;
        it.id = "t1-often-" + adjective;
        it.template_id = 1; // BELOW direction: premise keeps the entailing role
        it.condition = Condition::BELOW;
        it.premise = "often";
        it.adjective = adjective;
        it.bin = FreqBin::HIGH;
        it.surface = "If it is often " + adjective + ", then it is at least [MASK] " + adjective +
                     ".";
        items.push_back(it);
    }
    const auto pairs = to_nli(items, ts, lex(), 5);
    REQUIRE(pairs.size() == 2);
    int ent = 0, con = 0;
    for (const NliPair& p : pairs) {
        CHECK(p.premise_sentence == "It is often " + p.adjective + ".");
        if (p.label == NliLabel::ENTAILMENT) {
            ++ent;
            CHECK(lex().compare(p.hypothesis_adverb, "often") == ScaleOrder::BELOW);
        } else {
            ++con;
            CHECK(lex().compare(p.hypothesis_adverb, "often") == ScaleOrder::ABOVE);
        }
    }
    CHECK(ent == 1);
    CHECK(con == 1);
}

TEST_CASE("malformed templates are rejected by id") {
    TempDir tmp;
    testsupport::spit(tmp.file("t.tsv"),
                      "3\tBELOW\tIt is {PREMISE} {ADJ} and {ADJ}.\tAFTER_PREMISE\tAT_LEAST\n");
    try {
        load_templates(tmp.file("t.tsv"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("template 3") != std::string::npos);
    }
}
