#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "advprobe/errors.hpp"
#include "advprobe/extraction.hpp"
#include "advprobe/rng.hpp"
#include "advprobe/text.hpp"
#include "support/paths.hpp"

using namespace advprobe;
using testsupport::TempDir;

namespace {

const Lexicon& lex() {
    static Lexicon lexicon = testsupport::load_lexicon();
    return lexicon;
}

} // namespace

TEST_CASE("rule provider tags the ADV ADJ construction") {
    const RuleParseProvider provider(lex());
    const auto tokens = provider.parse("Most I know are quite empathetic.");
    REQUIRE(tokens.size() == 7); // six words + final period
    const ParsedToken& quite = tokens[4];
    const ParsedToken& empathetic = tokens[5];
    CHECK(quite.surface == "quite");
    CHECK(quite.pos == "ADV");
    CHECK(quite.dep == "advmod");
    CHECK(quite.head == 5);
    CHECK(empathetic.pos == "ADJ");
    CHECK(tokens[6].pos == "PUNCT");
    // offsets are consistent with the input
    CHECK(quite.begin == 16);
    CHECK(quite.end == 21);
}

TEST_CASE("rule provider rejects empty text") {
    const RuleParseProvider provider(lex());
    CHECK_THROWS_AS((void)provider.parse(""), InputError);
}

TEST_CASE("text without an adverb-adjective dependency yields nothing") {
    const RuleParseProvider provider(lex());
    std::vector<CorpusComment> corpus = {
        {"x1", "The committee scheduled another hearing for the end of the month today.", "", {}}};
    const auto items = extract_items(corpus, lex(), provider);
    CHECK(items.empty());
}

TEST_CASE("extraction reproduces the annotated fixture exactly") {
    const auto corpus = read_comments_jsonl(testsupport::fixtures_dir() / "comments_fixture.jsonl");
    REQUIRE(corpus.size() == 50);
    const RuleParseProvider provider(lex());
    ExtractStats stats;
    const auto items = extract_items(corpus, lex(), provider, {}, &stats);
    const auto expected = read_items_jsonl(testsupport::fixtures_dir() / "expected_items.jsonl");
    REQUIRE(items.size() == expected.size());
    for (size_t i = 0; i < items.size(); ++i) {
        CAPTURE(i);
        CHECK(items[i].source_id == expected[i].source_id);
        CHECK(items[i].context == expected[i].context);
        CHECK(items[i].adverb == expected[i].adverb);
        CHECK(items[i].adjective == expected[i].adjective);
        CHECK(items[i].mask_start == expected[i].mask_start);
        CHECK(items[i].mask_end == expected[i].mask_end);
        CHECK(items[i].word_count == expected[i].word_count);
    }
    CHECK(stats.deduplicated == 1); // c27 duplicates c04
    CHECK(stats.skipped_empty == 1);
}

TEST_CASE("extraction output serializes byte-identically across runs") {
    const auto corpus = read_comments_jsonl(testsupport::fixtures_dir() / "comments_fixture.jsonl");
    const RuleParseProvider provider(lex());
    TempDir tmp;
    write_items_jsonl(tmp.file("a.jsonl"), extract_items(corpus, lex(), provider));
    write_items_jsonl(tmp.file("b.jsonl"), extract_items(corpus, lex(), provider));
    CHECK(testsupport::slurp(tmp.file("a.jsonl")) == testsupport::slurp(tmp.file("b.jsonl")));
    CHECK(!testsupport::slurp(tmp.file("a.jsonl")).empty());
}

TEST_CASE("emitted items respect the word bounds on random corpora") {
    Rng rng(2015);
    const std::vector<std::string> filler = {"the",   "debate", "council", "votes", "people",
                                             "again", "policy", "this",    "city",  "budget"};
    const std::vector<std::string> adverbs = {"very", "often", "probably", "completely"};
    const std::vector<std::string> adjectives = {"strange", "broken", "useful", "loud"};
    const RuleParseProvider provider(lex());

    std::vector<CorpusComment> corpus;
    for (int i = 0; i < 300; ++i) {
        std::string body;
        const int sentences = 1 + static_cast<int>(rng.below(4));
        for (int s = 0; s < sentences; ++s) {
            const int words = static_cast<int>(rng.below(30));
            for (int w = 0; w < words; ++w) body += filler[rng.below(filler.size())] + " ";
            if (rng.coin()) {
                body += adverbs[rng.below(adverbs.size())] + " " +
                        adjectives[rng.below(adjectives.size())];
                body += ". ";
            } else {
                body += filler[rng.below(filler.size())] + ". ";
            }
        }
        corpus.push_back({"r" + std::to_string(1000 + i), body, "", {}});
    }
    ExtractOptions options;
    const auto items = extract_items(corpus, lex(), provider, options);
    CHECK(!items.empty());
    std::set<std::string> contexts;
    for (const ProbeItem& item : items) {
        CHECK(item.word_count >= options.min_words);
        CHECK(item.word_count <= options.max_words);
        CHECK(item.word_count == text::count_words(item.context));
        // mask span covers the adverb
        CHECK(text::to_lower(item.context.substr(item.mask_start,
                                                 item.mask_end - item.mask_start)) == item.adverb);
        CHECK(lex().lookup(item.adverb).is_target);
        // at most two sentence terminators inside the context
        int terminators = 0;
        for (char ch : item.context) {
            if (ch == '.' || ch == '!' || ch == '?') ++terminators;
        }
        CHECK(terminators <= 2);
        CHECK(contexts.insert(item.context).second); // deduplicated
    }
}

TEST_CASE("coverage report counts distinct adjectives per adverb") {
    SUBCASE("empty item set") {
        for (const CoverageRow& row : coverage_report({}, lex())) {
            CHECK(row.distinct_adjectives == 0);
            CHECK(row.below_threshold);
        }
    }
    SUBCASE("fixture counts match the annotation") {
        const auto expected =
            read_items_jsonl(testsupport::fixtures_dir() / "expected_items.jsonl");
        std::map<std::string, std::set<std::string>> by_adverb;
        for (const ProbeItem& item : expected) by_adverb[item.adverb].insert(item.adjective);
        for (const CoverageRow& row : coverage_report(expected, lex(), 40)) {
            const int want = by_adverb.count(row.adverb)
                                 ? static_cast<int>(by_adverb[row.adverb].size())
                                 : 0;
            CHECK(row.distinct_adjectives == want);
        }
    }
    SUBCASE("threshold boundary") {
        std::vector<ProbeItem> items;
        for (int i = 0; i < 39; ++i) {
            ProbeItem it;
            it.adverb = "very";
            it.adjective = "adj" + std::to_string(i);
            items.push_back(it);
        }
        auto rows = coverage_report(items, lex(), 40);
        const auto very = std::find_if(rows.begin(), rows.end(),
                                       [](const CoverageRow& r) { return r.adverb == "very"; });
        REQUIRE(very != rows.end());
        CHECK(very->distinct_adjectives == 39);
        CHECK(very->below_threshold);

        ProbeItem extra;
        extra.adverb = "very";
        extra.adjective = "adj39";
        items.push_back(extra);
        rows = coverage_report(items, lex(), 40);
        const auto very40 = std::find_if(rows.begin(), rows.end(),
                                         [](const CoverageRow& r) { return r.adverb == "very"; });
        CHECK_FALSE(very40->below_threshold);
    }
}
