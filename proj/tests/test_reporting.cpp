#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "advprobe/dataset_builder.hpp"
#include "advprobe/errors.hpp"
#include "advprobe/extraction.hpp"
#include "advprobe/reporting.hpp"
#include "advprobe/sha256.hpp"
#include "support/paths.hpp"

using namespace advprobe;
using testsupport::TempDir;

namespace {

const Lexicon& lex() {
    static Lexicon lexicon = testsupport::load_lexicon();
    return lexicon;
}

// Small fully-populated report used by the golden-file tests.
Report fixture_report() {
    Report report;
    report.model_name = "fixture";
    report.config_hash = "0123abcd";

    RankingReportRow row;
    row.method = RankMethod::ADJDIFF;
    row.category = ScaleCategory::MODALITY;
    row.eval = {0.75, 0.5, 0.25, 6};
    report.ranking.push_back(row);
    row.method = RankMethod::SIM;
    row.category = ScaleCategory::DEGREE;
    row.eval = {0.5625, -0.25, -0.125, 8};
    report.ranking.push_back(row);

    MlmAggregate agg;
    agg.variant = Variant::FULL_CONTEXT;
    agg.per_category[0] = {0.5, 0.25, 8, 0, 1};
    agg.per_category[1] = {0.125, 0.75, 16, 1, 0};
    agg.per_category[2] = {0.0625, 0.375, 4, 0, 0};
    agg.overall = {0.25, 0.5, 28, 1, 1};
    agg.confusion = make_target_confusion(lex());
    agg.confusion.increment("very", "very");
    agg.confusion.increment("very", "not");
    agg.confusion.increment("often", "OTHER");
    report.mlm.push_back(agg);

    EntailmentResult ent;
    ent.variant = NegVariant::WITH_NEG;
    ent.overall = {40, 30, 10, 15, 5, 0};
    ent.by_bin_condition[{FreqBin::PSEUDO, Condition::BELOW}] = {10, 8, 2, 4, 1, 0};
    ent.by_bin_condition[{FreqBin::HIGH, Condition::ABOVE}] = {30, 22, 8, 11, 4, 0};
    ent.by_template[1] = {20, 15, 5, 8, 2, 0};
    ent.by_template[16] = {20, 15, 5, 7, 3, 0};
    ent.by_mask_position[MaskPosition::BEFORE_PREMISE] = {18, 14, 4, 8, 2, 0};
    ent.by_mask_position[MaskPosition::AFTER_PREMISE] = {22, 16, 6, 7, 3, 0};
    ent.by_condition[Condition::BELOW] = {10, 8, 2, 4, 1, 0};
    ent.by_condition[Condition::ABOVE] = {30, 22, 8, 11, 4, 0};
    ent.confusion = make_target_confusion(lex());
    ent.confusion.increment("often", "sometimes");
    ent.confusion.increment("often", "not");
    report.entailment.push_back({"model/WITH_NEG", ent});

    NliProbeResult nli;
    nli.n = 100;
    nli.correct = 45;
    nli.per_bin[FreqBin::PSEUDO] = {10, 25};
    nli.per_bin[FreqBin::LOW] = {12, 25};
    nli.per_bin[FreqBin::MED] = {11, 25};
    nli.per_bin[FreqBin::HIGH] = {12, 25};
    nli.confusion = {{{20, 10, 20}, {15, 10, 25}}};
    report.nli = nli;
    return report;
}

bool update_golden() { return std::getenv("ADVPROBE_UPDATE_GOLDEN") != nullptr; }

void check_against_golden(const std::filesystem::path& rendered, const std::string& name) {
    const std::filesystem::path golden = testsupport::fixtures_dir() / "golden" / name;
    if (update_golden()) {
        std::filesystem::create_directories(golden.parent_path());
        std::filesystem::copy_file(rendered, golden,
                                   std::filesystem::copy_options::overwrite_existing);
        return;
    }
    REQUIRE_MESSAGE(std::filesystem::exists(golden), "missing golden file: " << name);
    CHECK_MESSAGE(testsupport::slurp(rendered) == testsupport::slurp(golden),
                  "golden mismatch: " << name);
}

} // namespace

TEST_CASE("rendered tables match the golden files byte for byte") {
    TempDir tmp;
    render_tables(fixture_report(), tmp.path);
    for (const std::string name :
         {"ranking.csv", "ranking.txt", "mlm.csv", "mlm.txt", "entailment.csv", "entailment.txt",
          "entailment_templates.csv", "entailment_mask_position.csv", "nli.csv", "nli.txt",
          "tables_schema.json"}) {
        check_against_golden(tmp.file(name), name);
    }
}

TEST_CASE("empty reports render header-only tables") {
    TempDir tmp;
    render_tables(Report{}, tmp.path);
    const std::string ranking = testsupport::slurp(tmp.file("ranking.csv"));
    CHECK(ranking == "method,category,pairwise_accuracy,spearman_rho,kendall_tau_b,n\n");
    const std::string nli = testsupport::slurp(tmp.file("nli.csv"));
    CHECK(nli == "bin,accuracy,n\n");
}

TEST_CASE("zero-denominator metrics render as NA, never zero") {
    Report report;
    EntailmentResult ent;
    ent.variant = NegVariant::WITH_NEG;
    ent.overall = {0, 0, 0, 5, 0, 0}; // only trivial answers: accuracy undefined
    ent.confusion = make_target_confusion(lex());
    report.entailment.push_back({"model/WITH_NEG", ent});
    TempDir tmp;
    render_tables(report, tmp.path);
    const std::string csv = testsupport::slurp(tmp.file("entailment.csv"));
    CHECK(csv.find("all,all,NA,1") != std::string::npos);
}

TEST_CASE("heatmaps are deterministic and diagonal-dominant for identity confusion") {
    ConfusionMatrix m = make_target_confusion(lex());
    for (const std::string& row : m.row_labels) {
        for (int i = 0; i < 5; ++i) m.increment(row, row);
    }
    TempDir tmp;
    render_heatmap(m, tmp.file("identity.ppm"));
    render_heatmap(m, tmp.file("identity2.ppm"));
    const std::string a = testsupport::slurp(tmp.file("identity.ppm"));
    CHECK(a == testsupport::slurp(tmp.file("identity2.ppm")));
    REQUIRE(a.substr(0, 2) == "P6");

    // parse dimensions, then compare one diagonal cell with an off-diagonal one
    std::istringstream header(a.substr(3));
    size_t width = 0, height = 0;
    int maxval = 0;
    header >> width >> height >> maxval;
    const size_t pixel_start = a.find("255\n") + 4;
    const size_t cell = 16;
    auto pixel = [&](size_t row_cell, size_t col_cell) {
        const size_t y = row_cell * cell + cell / 2;
        const size_t x = col_cell * cell + cell / 2;
        const size_t off = pixel_start + (y * width + x) * 3;
        return std::array<unsigned char, 3>{static_cast<unsigned char>(a[off]),
                                            static_cast<unsigned char>(a[off + 1]),
                                            static_cast<unsigned char>(a[off + 2])};
    };
    const auto on_diag = pixel(0, 0);
    const auto off_diag = pixel(0, 1);
    CHECK(on_diag != off_diag);
    // row-normalized full intensity lands on the top colormap stop (yellow)
    CHECK(static_cast<int>(on_diag[0]) == 240);
    CHECK(static_cast<int>(on_diag[2]) == 33);
}

TEST_CASE("an all-`very` prediction column lights up alone") {
    ConfusionMatrix m = make_target_confusion(lex());
    for (const std::string& row : m.row_labels) m.increment(row, "very");
    TempDir tmp;
    render_heatmap(m, tmp.file("very.ppm"));
    const std::string img = testsupport::slurp(tmp.file("very.ppm"));
    const std::string hash = sha256_hex(img);
    const std::filesystem::path golden = testsupport::fixtures_dir() / "golden" / "very_column.sha256";
    if (update_golden()) {
        testsupport::spit(golden, hash + "\n");
    } else {
        REQUIRE(std::filesystem::exists(golden));
        CHECK(hash + "\n" == testsupport::slurp(golden));
    }
}

TEST_CASE("report JSON round-trips its aggregates") {
    const Report report = fixture_report();
    const Report back = report_from_json(report_to_json(report));
    CHECK(back.model_name == report.model_name);
    CHECK(back.ranking.size() == report.ranking.size());
    CHECK(back.ranking[0].eval.pairwise_accuracy == report.ranking[0].eval.pairwise_accuracy);
    CHECK(back.mlm.size() == 1);
    CHECK(back.mlm[0].overall.mrr == report.mlm[0].overall.mrr);
    CHECK(back.mlm[0].confusion.counts == report.mlm[0].confusion.counts);
    REQUIRE(back.entailment.size() == 1);
    CHECK(back.entailment[0].second.overall.correct == 40);
    CHECK(back.entailment[0].second.by_template.at(16).trivial == 7);
    REQUIRE(back.nli.has_value());
    CHECK(back.nli->n == 100);
    CHECK(back.nli->confusion == report.nli->confusion);
    // and rendering the round-tripped report is byte-identical
    TempDir tmp;
    render_tables(report, tmp.path / "a");
    render_tables(back, tmp.path / "b");
    CHECK(testsupport::slurp(tmp.path / "a" / "entailment.csv") ==
          testsupport::slurp(tmp.path / "b" / "entailment.csv"));
}

TEST_CASE("run configs validate paths and pin seeds") {
    TempDir tmp;
    SUBCASE("missing seed is rejected") {
        testsupport::spit(tmp.file("cfg.json"), R"({"output_dir": "out"})");
        CHECK_THROWS_AS(RunConfig::load(tmp.file("cfg.json")), ValidationError);
    }
    SUBCASE("missing dataset path fails validation before any model work") {
        testsupport::spit(tmp.file("cfg.json"),
                          nlohmann::json{{"seed", 1},
                                         {"output_dir", (tmp.path / "out").string()},
                                         {"lexicon", (testsupport::data_dir() / "lexicon.tsv").string()},
                                         {"entailment", (tmp.path / "missing.jsonl").string()},
                                         {"probes", {"random"}}}
                              .dump());
        const RunConfig cfg = RunConfig::load(tmp.file("cfg.json"));
        CHECK_THROWS_AS(cfg.validate(), ValidationError);
    }
    SUBCASE("unknown probe name is rejected") {
        testsupport::spit(tmp.file("cfg.json"),
                          nlohmann::json{{"seed", 1},
                                         {"output_dir", (tmp.path / "out").string()},
                                         {"lexicon", (testsupport::data_dir() / "lexicon.tsv").string()},
                                         {"probes", {"mystery"}}}
                              .dump());
        CHECK_THROWS_AS(RunConfig::load(tmp.file("cfg.json")).validate(), ValidationError);
    }
    SUBCASE("the config hash is stable") {
        testsupport::spit(tmp.file("cfg.json"),
                          nlohmann::json{{"seed", 1},
                                         {"output_dir", (tmp.path / "out").string()},
                                         {"lexicon", (testsupport::data_dir() / "lexicon.tsv").string()}}
                              .dump());
        const RunConfig a = RunConfig::load(tmp.file("cfg.json"));
        const RunConfig b = RunConfig::load(tmp.file("cfg.json"));
        CHECK(a.hash() == b.hash());
        CHECK(a.hash().size() == 64);
    }
}

TEST_CASE("run executes mock probes end to end and reruns reproducibly") {
    TempDir tmp;
    // small datasets
    const auto corpus = read_comments_jsonl(testsupport::fixtures_dir() /
                                            "comments_fixture.jsonl");
    const RuleParseProvider provider(lex());
    const auto items = extract_items(corpus, lex(), provider);
    const auto instances = build_mlm_items(items);
    write_mlm_jsonl(tmp.file("mlm.jsonl"), instances);

    AdjectivePool pool = AdjectivePool::load(testsupport::data_dir() / "adjective_pool.tsv");
    AdjectivePool small;
    for (size_t i = 0; i < pool.entries.size(); i += 20) small.entries.push_back(pool.entries[i]);
    const auto templates = load_templates(testsupport::data_dir() / "templates.tsv");
    const auto ent_items = generate_entailment(templates, small, lex());
    write_entailment_jsonl(tmp.file("entailment.jsonl"), ent_items);
    write_nli_jsonl(tmp.file("nli.jsonl"), to_nli(ent_items, templates, lex(), 3));

    nlohmann::json cfg{
        {"model", {{"name", "mock-frequency"}, {"kind", "mock"}, {"behavior", "frequency"}}},
        {"lexicon", (testsupport::data_dir() / "lexicon.tsv").string()},
        {"templates", (testsupport::data_dir() / "templates.tsv").string()},
        {"mlm", tmp.file("mlm.jsonl").string()},
        {"entailment", tmp.file("entailment.jsonl").string()},
        {"nli", tmp.file("nli.jsonl").string()},
        {"probes", {"mlm", "entailment", "random", "nli"}},
        {"seed", 77},
        {"output_dir", (tmp.path / "out").string()}};
    testsupport::spit(tmp.file("cfg.json"), cfg.dump());

    CHECK(run(RunConfig::load(tmp.file("cfg.json"))) == 0);

    const std::vector<std::string> key_artifacts = {
        "report.json", "mlm_verdicts.jsonl", "entailment_verdicts_with_neg.jsonl",
        "random_verdicts_with_neg.jsonl", "entailment.csv"};
    for (const std::string artifact :
         {"report.json", "mlm_verdicts.jsonl", "entailment_verdicts_with_neg.jsonl",
          "random_verdicts_with_neg.jsonl", "mlm.csv", "entailment.csv", "nli.csv",
          "mlm_confusion_full_context.ppm", "manifest.json"}) {
        CAPTURE(artifact);
        CHECK(std::filesystem::exists(tmp.path / "out" / artifact));
    }
    std::map<std::string, std::string> first_bytes;
    for (const std::string& artifact : key_artifacts) {
        first_bytes[artifact] = testsupport::slurp(tmp.path / "out" / artifact);
    }
    const nlohmann::json manifest =
        nlohmann::json::parse(testsupport::slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest.at("status") == "ok");

    // rerunning the same config reproduces every artifact byte for byte
    CHECK(run(RunConfig::load(tmp.file("cfg.json"))) == 0);
    for (const std::string& artifact : key_artifacts) {
        CAPTURE(artifact);
        CHECK(testsupport::slurp(tmp.path / "out" / artifact) == first_bytes[artifact]);
    }
    const nlohmann::json manifest2 =
        nlohmann::json::parse(testsupport::slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest.at("artifacts") == manifest2.at("artifacts"));
    CHECK(manifest.at("config_hash") == manifest2.at("config_hash"));

    // rank probe with the synthetic provider
    nlohmann::json rank_cfg{
        {"model", {{"name", "synthetic"}, {"kind", "synthetic"}, {"dims", 16}}},
        {"lexicon", (testsupport::data_dir() / "lexicon.tsv").string()},
        {"frames", (testsupport::data_dir() / "frame_adjectives.txt").string()},
        {"probes", {"rank"}},
        {"seed", 77},
        {"output_dir", (tmp.path / "rank").string()}};
    testsupport::spit(tmp.file("rank.json"), rank_cfg.dump());
    CHECK(run(RunConfig::load(tmp.file("rank.json"))) == 0);
    const std::string ranking = testsupport::slurp(tmp.path / "rank" / "ranking.csv");
    CHECK(ranking.find("ADJDIFF,MODALITY,1,1,1,6") != std::string::npos);
}

TEST_CASE("a failing probe leaves partial artifacts and a failure manifest") {
    TempDir tmp;
    nlohmann::json cfg{
        {"model", {{"name", "mock"}, {"kind", "mock"}}},
        {"lexicon", (testsupport::data_dir() / "lexicon.tsv").string()},
        {"frames", (testsupport::data_dir() / "frame_adjectives.txt").string()},
        {"probes", {"rank"}}, // mock cannot produce embeddings
        {"seed", 1},
        {"output_dir", (tmp.path / "out").string()}};
    testsupport::spit(tmp.file("cfg.json"), cfg.dump());
    CHECK(run(RunConfig::load(tmp.file("cfg.json"))) == 1);
    const nlohmann::json manifest =
        nlohmann::json::parse(testsupport::slurp(tmp.path / "out" / "manifest.json"));
    CHECK(manifest.at("status") == "failed");
    CHECK(manifest.at("failures").size() == 1);
    CHECK(std::filesystem::exists(tmp.path / "out" / "report.json"));
}
