#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "advprobe/dataset_builder.hpp"
#include "advprobe/errors.hpp"
#include "advprobe/extraction.hpp"
#include "advprobe/probes.hpp"
#include "advprobe/remote.hpp"
#include "advprobe/reporting.hpp"
#include "advprobe/scale_ranking.hpp"
#include "advprobe/text.hpp"

namespace {

using namespace advprobe;

struct ModelArgs {
    std::string config_path;
    std::string kind = "mock";
    std::string behavior = "frequency";
    std::string url;
    int dims = 16;
    int layer = -1;
    std::string pooling = "MEAN_SUBTOKENS";
    CLI::Option* o_kind = nullptr;
    CLI::Option* o_behavior = nullptr;
    CLI::Option* o_url = nullptr;
    CLI::Option* o_dims = nullptr;
    CLI::Option* o_layer = nullptr;
    CLI::Option* o_pooling = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", config_path,
                        "model config JSON (kind/behavior/url/layer/pooling/dims); "
                        "explicit flags override its fields");
        o_kind = cmd->add_option("--model-kind", kind, "mock | http | synthetic")
                     ->capture_default_str();
        o_behavior = cmd->add_option("--model-behavior", behavior,
                                     "mock behavior: target-first | not-first | uniform | "
                                     "frequency")
                         ->capture_default_str();
        o_url = cmd->add_option("--model-url", url, "base URL of a model server (kind http)");
        o_dims = cmd->add_option("--dims", dims, "synthetic embedding dimensionality")
                     ->capture_default_str();
        o_layer =
            cmd->add_option("--layer", layer, "embedding layer (-1 = final)")->capture_default_str();
        o_pooling = cmd->add_option("--pooling", pooling, "MEAN_SUBTOKENS | FIRST_SUBTOKEN")
                        ->capture_default_str();
    }

    // Applies the config file under any explicitly passed flags.
    void resolve() {
        if (config_path.empty()) return;
        std::ifstream in(config_path);
        if (!in) throw Error("cannot open model config: " + config_path);
        nlohmann::json j;
        in >> j;
        if (o_kind->count() == 0 && j.contains("kind")) kind = j["kind"].get<std::string>();
        if (o_behavior->count() == 0 && j.contains("behavior"))
            behavior = j["behavior"].get<std::string>();
        if (o_url->count() == 0 && j.contains("url")) url = j["url"].get<std::string>();
        if (o_dims->count() == 0 && j.contains("dims")) dims = j["dims"].get<int>();
        if (o_layer->count() == 0 && j.contains("layer")) layer = j["layer"].get<int>();
        if (o_pooling->count() == 0 && j.contains("pooling"))
            pooling = j["pooling"].get<std::string>();
    }

    GatewayOptions gateway() const {
        GatewayOptions g;
        g.layer = layer;
        g.pooling = parse_pooling(pooling);
        return g;
    }

    MaskGateway masked_gateway(const Lexicon& lexicon,
                               const std::vector<std::pair<std::string, std::string>>& text_targets)
        const {
        if (kind == "mock") {
            return MaskGateway(make_mock_masked_lm(text_targets, lexicon,
                                                   parse_mock_behavior(behavior)),
                               gateway());
        }
        if (kind == "http") {
            return MaskGateway(std::make_shared<HttpModelProvider>(url), gateway());
        }
        throw CapabilityError("model kind '" + kind + "' cannot answer mask queries");
    }
};

int cmd_extract(const std::string& input, const std::string& output,
                const std::string& lexicon_path, const ExtractOptions& options,
                const std::string& coverage_path, int threshold) {
    const Lexicon lexicon = Lexicon::load(lexicon_path);
    const RuleParseProvider provider(lexicon);
    ExtractStats stats;
    const auto comments = read_comments_jsonl(input);
    const auto items = extract_items(comments, lexicon, provider, options, &stats);
    write_items_jsonl(output, items);
    std::cerr << "extracted " << stats.items << " items from " << stats.comments << " comments ("
              << stats.deduplicated << " deduplicated, " << stats.out_of_bounds
              << " out of bounds, " << stats.parse_failures << " parse failures)\n";
    if (!coverage_path.empty()) {
        std::ofstream cov(coverage_path);
        cov << "adverb,distinct_adjectives,below_threshold\n";
        for (const CoverageRow& row : coverage_report(items, lexicon, threshold)) {
            cov << row.adverb << ',' << row.distinct_adjectives << ','
                << (row.below_threshold ? 1 : 0) << '\n';
        }
    }
    return 0;
}

int cmd_build_entailment(const std::string& templates_path, const std::string& pool_path,
                         const std::string& lexicon_path, const std::string& output,
                         bool paper_exact, const std::vector<std::string>& below_exclude,
                         const std::vector<std::string>& above_exclude, bool keep_negations,
                         bool keep_bottom, bool keep_top) {
    const Lexicon lexicon = Lexicon::load(lexicon_path);
    auto templates = load_templates(templates_path);
    if (paper_exact) apply_paper_exact(templates);
    const AdjectivePool pool = AdjectivePool::load(pool_path);
    EligibilityOptions opts;
    opts.exclude_negations = !keep_negations;
    opts.exclude_bottom_for_below = !keep_bottom;
    opts.exclude_top_for_above = !keep_top;
    opts.extra_excluded_below.insert(below_exclude.begin(), below_exclude.end());
    opts.extra_excluded_above.insert(above_exclude.begin(), above_exclude.end());
    const auto items = generate_entailment(templates, pool, lexicon, opts);
    write_entailment_jsonl(output, items);
    std::cerr << "generated " << items.size() << " items ("
              << eligible_premises(lexicon, Condition::BELOW, opts).size() << " BELOW premises, "
              << eligible_premises(lexicon, Condition::ABOVE, opts).size()
              << " ABOVE premises, " << pool.entries.size() << " adjectives)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scalar adverb probing toolkit"};
    app.require_subcommand(1);

    std::string lexicon_path = "data/lexicon.tsv";
    app.add_option("--lexicon", lexicon_path, "lexicon TSV")->capture_default_str();

    // extract
    auto* extract = app.add_subcommand("extract", "Extract ADV ADJ probe items from a corpus");
    std::string ex_input, ex_output, ex_coverage;
    ExtractOptions ex_options;
    int ex_threshold = 40;
    std::vector<std::string> ex_targets;
    extract->add_option("--input", ex_input, "comments JSONL")->required();
    extract->add_option("--output", ex_output, "items JSONL")->required();
    extract->add_option("--min-words", ex_options.min_words)->capture_default_str();
    extract->add_option("--max-words", ex_options.max_words)->capture_default_str();
    extract->add_option("--max-sentences", ex_options.max_sentences)->capture_default_str();
    extract->add_option("--targets", ex_targets, "restrict to these adverbs");
    extract->add_option("--coverage", ex_coverage, "write per-adverb coverage CSV");
    extract->add_option("--coverage-threshold", ex_threshold)->capture_default_str();

    // build-mlm
    auto* build_mlm = app.add_subcommand("build-mlm", "Masked instances from probe items");
    std::string bm_items, bm_output;
    build_mlm->add_option("--items", bm_items, "items JSONL")->required();
    build_mlm->add_option("--output", bm_output, "masked instances JSONL")->required();

    // build-entailment
    auto* build_ent = app.add_subcommand("build-entailment", "Generate the entailment dataset");
    std::string be_templates = "data/templates.tsv";
    std::string be_pool = "data/adjective_pool.tsv";
    std::string be_output;
    bool be_paper_exact = false;
    bool be_keep_negations = false, be_keep_bottom = false, be_keep_top = false;
    std::vector<std::string> be_below_exclude, be_above_exclude;
    build_ent->add_option("--templates", be_templates)->capture_default_str();
    build_ent->add_option("--pool", be_pool)->capture_default_str();
    build_ent->add_option("--output", be_output)->required();
    build_ent->add_flag("--paper-exact", be_paper_exact,
                        "use the printed wording of template 16");
    build_ent->add_flag("--keep-negations", be_keep_negations,
                        "admit negation adverbs as premises");
    build_ent->add_flag("--keep-bottom", be_keep_bottom,
                        "admit bottom-group premises in BELOW");
    build_ent->add_flag("--keep-top", be_keep_top, "admit top-group premises in ABOVE");
    build_ent->add_option("--below-exclude", be_below_exclude,
                          "additional premises to exclude from BELOW");
    build_ent->add_option("--above-exclude", be_above_exclude,
                          "additional premises to exclude from ABOVE");

    // build-nli
    auto* build_nli = app.add_subcommand("build-nli", "NLI pairs from entailment items");
    std::string bn_items, bn_output, bn_templates = "data/templates.tsv";
    uint64_t bn_seed = 0;
    build_nli->add_option("--items", bn_items, "entailment items JSONL")->required();
    build_nli->add_option("--templates", bn_templates)->capture_default_str();
    build_nli->add_option("--output", bn_output)->required();
    build_nli->add_option("--seed", bn_seed)->required();

    // rank
    auto* rank = app.add_subcommand("rank", "Embedding-space scalar ranking");
    std::string rk_method = "adjdiff";
    std::string rk_frames = "data/frame_adjectives.txt";
    std::string rk_output;
    bool rk_avg_diffs = false;
    ModelArgs rk_model;
    rk_model.kind = "synthetic";
    rank->add_option("--method", rk_method, "sim | diff | adjdiff | all")->capture_default_str();
    rank->add_option("--frames", rk_frames)->capture_default_str();
    rank->add_option("--output", rk_output, "result JSON")->required();
    rank->add_flag("--average-diffs", rk_avg_diffs,
                   "average difference vectors before the cosine");
    rk_model.attach(rank);

    // probe-mlm
    auto* probe_mlm = app.add_subcommand("probe-mlm", "Run the masked-adverb probe");
    std::string pm_dataset, pm_outdir;
    ModelArgs pm_model;
    probe_mlm->add_option("--dataset", pm_dataset, "masked instances JSONL")->required();
    probe_mlm->add_option("--output-dir", pm_outdir)->required();
    pm_model.attach(probe_mlm);

    // probe-entailment
    auto* probe_ent = app.add_subcommand("probe-entailment", "Run the entailment probe");
    std::string pe_dataset, pe_outdir, pe_variant = "with-neg";
    std::string pe_templates = "data/templates.tsv";
    uint64_t pe_seed = 0;
    ModelArgs pe_model;
    probe_ent->add_option("--dataset", pe_dataset, "entailment items JSONL")->required();
    probe_ent->add_option("--templates", pe_templates)->capture_default_str();
    probe_ent->add_option("--variant", pe_variant, "with-neg | no-neg")->capture_default_str();
    probe_ent->add_option("--output-dir", pe_outdir)->required();
    probe_ent->add_option("--seed", pe_seed, "seed (model kind random)")->capture_default_str();
    pe_model.attach(probe_ent);
    probe_ent->get_option("--model-kind")->description("mock | http | random");

    // probe-nli
    auto* probe_nli = app.add_subcommand("probe-nli", "Run the NLI probe");
    std::string pn_dataset, pn_outdir, pn_kind = "mock", pn_behavior = "oracle", pn_url;
    uint64_t pn_seed = 0;
    probe_nli->add_option("--dataset", pn_dataset, "NLI pairs JSONL")->required();
    probe_nli->add_option("--output-dir", pn_outdir)->required();
    probe_nli->add_option("--model-kind", pn_kind, "mock | http")->capture_default_str();
    probe_nli->add_option("--model-behavior", pn_behavior, "oracle | uniform")
        ->capture_default_str();
    probe_nli->add_option("--model-url", pn_url);
    probe_nli->add_option("--seed", pn_seed)->capture_default_str();

    // probe-remote
    auto* probe_remote = app.add_subcommand("probe-remote", "Probe a completion API on a sample");
    std::string pr_dataset, pr_outdir, pr_templates = "data/templates.tsv";
    std::string pr_url, pr_path = "/v1/completions", pr_model_name, pr_cache, pr_variant = "with-neg";
    size_t pr_sample = 5120;
    uint64_t pr_seed = 0;
    int pr_n = 10;
    bool pr_cache_only = false;
    probe_remote->add_option("--dataset", pr_dataset, "entailment items JSONL")->required();
    probe_remote->add_option("--templates", pr_templates)->capture_default_str();
    probe_remote->add_option("--output-dir", pr_outdir)->required();
    probe_remote->add_option("--sample", pr_sample)->capture_default_str();
    probe_remote->add_option("--seed", pr_seed)->required();
    probe_remote->add_option("--n", pr_n, "completions per prompt")->capture_default_str();
    probe_remote->add_option("--url", pr_url, "completion endpoint base URL");
    probe_remote->add_option("--path", pr_path)->capture_default_str();
    probe_remote->add_option("--model", pr_model_name, "remote model name");
    probe_remote->add_option("--cache", pr_cache, "response cache JSONL")->required();
    probe_remote->add_flag("--cache-only", pr_cache_only, "replay recorded responses only");
    probe_remote->add_option("--variant", pr_variant)->capture_default_str();

    // report
    auto* report_cmd = app.add_subcommand("report", "Re-render tables and heatmaps from a report");
    std::string rp_input, rp_outdir;
    report_cmd->add_option("--input", rp_input, "report.json")->required();
    report_cmd->add_option("--output-dir", rp_outdir)->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "Execute probes from a declarative config");
    std::string rn_config;
    run_cmd->add_option("--config", rn_config, "run config JSON")->required();

    // allow the global --lexicon after the subcommand name
    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            const Lexicon lex = Lexicon::load(lexicon_path);
            for (const std::string& t : ex_targets) {
                ex_options.restrict_targets.insert(lex.lookup(t).surface);
            }
            return cmd_extract(ex_input, ex_output, lexicon_path, ex_options, ex_coverage,
                               ex_threshold);
        }
        if (build_mlm->parsed()) {
            MlmBuildStats stats;
            const auto instances = build_mlm_items(read_items_jsonl(bm_items), &stats);
            write_mlm_jsonl(bm_output, instances);
            std::cerr << "built " << instances.size() << " masked instances (" << stats.rejected
                      << " rejected)\n";
            return 0;
        }
        if (build_ent->parsed()) {
            return cmd_build_entailment(be_templates, be_pool, lexicon_path, be_output,
                                        be_paper_exact, be_below_exclude, be_above_exclude,
                                        be_keep_negations, be_keep_bottom, be_keep_top);
        }
        if (build_nli->parsed()) {
            const Lexicon lexicon = Lexicon::load(lexicon_path);
            const auto templates = load_templates(bn_templates);
            NliBuildStats stats;
            const auto pairs =
                to_nli(read_entailment_jsonl(bn_items), templates, lexicon, bn_seed, &stats);
            write_nli_jsonl(bn_output, pairs);
            std::cerr << "built " << pairs.size() << " NLI pairs (" << stats.skipped_no_filler
                      << " skipped, " << stats.dropped_for_balance << " dropped for balance)\n";
            return 0;
        }
        if (rank->parsed()) {
            rk_model.resolve();
            const Lexicon lexicon = Lexicon::load(lexicon_path);
            std::shared_ptr<EmbeddingProvider> provider;
            if (rk_model.kind == "synthetic") {
                provider = std::make_shared<SyntheticEmbeddingProvider>(
                    lexicon, static_cast<size_t>(rk_model.dims));
            } else if (rk_model.kind == "http") {
                provider = std::make_shared<HttpModelProvider>(rk_model.url);
            } else {
                throw CapabilityError("rank requires a synthetic or http model");
            }
            RankerOptions opts;
            opts.gateway = rk_model.gateway();
            opts.average_diffs_before_cosine = rk_avg_diffs;
            ScaleRanker ranker(lexicon, *provider, load_frame_adjectives(rk_frames), opts);
            std::vector<RankMethod> methods;
            if (rk_method == "all") {
                methods = {RankMethod::SIM, RankMethod::DIFF, RankMethod::ADJDIFF};
            } else {
                methods = {parse_rank_method(rk_method)};
            }
            nlohmann::ordered_json out = nlohmann::ordered_json::array();
            for (RankMethod m : methods) {
                for (ScaleCategory c : kAllCategories) {
                    const RankingResult r = ranker.rank(m, c);
                    const RankingEvaluation eval = ranker.evaluate(r);
                    nlohmann::ordered_json row;
                    row["method"] = to_string(m);
                    row["category"] = to_string(c);
                    nlohmann::ordered_json scores;
                    for (const auto& [adverb, score] : r.scores) scores[adverb] = score;
                    row["scores"] = scores;
                    row["predicted_order"] = r.predicted_order;
                    row["pairwise_accuracy"] = eval.pairwise_accuracy;
                    row["spearman_rho"] = eval.spearman_rho;
                    row["kendall_tau_b"] = eval.kendall_tau_b;
                    out.push_back(row);
                }
            }
            std::ofstream f(rk_output);
            if (!f) throw Error("cannot write " + rk_output);
            f << out.dump(2) << "\n";
            return 0;
        }
        if (probe_mlm->parsed()) {
            pm_model.resolve();
            const Lexicon lexicon = Lexicon::load(lexicon_path);
            const auto instances = read_mlm_jsonl(pm_dataset);
            std::vector<std::pair<std::string, std::string>> text_targets;
            for (const auto& m : instances) text_targets.push_back({m.text_with_mask, m.target});
            const MaskGateway gateway = pm_model.masked_gateway(lexicon, text_targets);
            const MlmResult result = run_mlm_probe(instances, gateway, lexicon);
            std::filesystem::create_directories(pm_outdir);
            write_mlm_verdicts_jsonl(std::filesystem::path(pm_outdir) / "mlm_verdicts.jsonl",
                                     result.verdicts);
            Report report;
            report.model_name = pm_model.kind;
            report.mlm = result.aggregates;
            for (const MlmAggregate& agg : result.aggregates) {
                render_heatmap(agg.confusion,
                               std::filesystem::path(pm_outdir) /
                                   ("mlm_confusion_" + text::to_lower(to_string(agg.variant)) +
                                    ".ppm"));
            }
            render_tables(report, pm_outdir);
            std::ofstream f(std::filesystem::path(pm_outdir) / "report.json");
            f << report_to_json(report);
            return 0;
        }
        if (probe_ent->parsed()) {
            pe_model.resolve();
            const Lexicon lexicon = Lexicon::load(lexicon_path);
            const auto items = read_entailment_jsonl(pe_dataset);
            const auto templates = load_templates(pe_templates);
            const NegVariant variant = parse_neg_variant(pe_variant);
            EntailmentResult result;
            if (pe_model.kind == "random") {
                result = run_random_baseline(items, templates, lexicon, pe_seed, variant);
            } else {
                std::vector<std::pair<std::string, std::string>> text_targets;
                for (const auto& it : items) text_targets.push_back({it.surface, it.premise});
                const MaskGateway gateway = pe_model.masked_gateway(lexicon, text_targets);
                result = run_entailment_probe(items, templates, gateway, variant, lexicon);
            }
            std::filesystem::create_directories(pe_outdir);
            write_entailment_verdicts_jsonl(
                std::filesystem::path(pe_outdir) /
                    ("entailment_verdicts_" + text::to_lower(to_string(variant)) + ".jsonl"),
                result.verdicts);
            render_heatmap(result.confusion,
                           std::filesystem::path(pe_outdir) /
                               ("entailment_confusion_" + text::to_lower(to_string(variant)) +
                                ".ppm"));
            Report report;
            report.model_name = pe_model.kind;
            report.entailment.push_back({"model/" + to_string(variant), std::move(result)});
            render_tables(report, pe_outdir);
            std::ofstream f(std::filesystem::path(pe_outdir) / "report.json");
            f << report_to_json(report);
            return 0;
        }
        if (probe_nli->parsed()) {
            const Lexicon lexicon = Lexicon::load(lexicon_path);
            const auto pairs = read_nli_jsonl(pn_dataset);
            std::shared_ptr<NliProvider> provider;
            if (pn_kind == "mock") {
                if (pn_behavior == "uniform") provider = std::make_shared<UniformNli>(pn_seed);
                else provider = std::make_shared<GoldOracleNli>(lexicon);
            } else if (pn_kind == "http") {
                provider = std::make_shared<HttpModelProvider>(pn_url);
            } else {
                throw CapabilityError("model kind '" + pn_kind + "' has no NLI head");
            }
            Report report;
            report.model_name = pn_kind + "/" + pn_behavior;
            report.nli = run_nli_probe(pairs, *provider);
            std::filesystem::create_directories(pn_outdir);
            render_tables(report, pn_outdir);
            std::ofstream f(std::filesystem::path(pn_outdir) / "report.json");
            f << report_to_json(report);
            return 0;
        }
        if (probe_remote->parsed()) {
            const Lexicon lexicon = Lexicon::load(lexicon_path);
            const auto items = read_entailment_jsonl(pr_dataset);
            const auto templates = load_templates(pr_templates);
            RemoteConfig rc;
            rc.base_url = pr_url;
            rc.path = pr_path;
            rc.model = pr_model_name;
            rc.cache_path = pr_cache;
            rc.cache_only = pr_cache_only;
            CompletionClient client(rc);
            RemoteProbeOptions opts;
            opts.sample_size = pr_sample;
            opts.seed = pr_seed;
            opts.completions = pr_n;
            opts.variant = parse_neg_variant(pr_variant);
            EntailmentResult result = run_remote_probe(items, templates, client, lexicon, opts);
            std::filesystem::create_directories(pr_outdir);
            write_entailment_verdicts_jsonl(
                std::filesystem::path(pr_outdir) / "remote_verdicts.jsonl", result.verdicts);
            Report report;
            report.model_name = "remote/" + pr_model_name;
            report.entailment.push_back({"remote/" + to_string(opts.variant), std::move(result)});
            render_tables(report, pr_outdir);
            std::ofstream f(std::filesystem::path(pr_outdir) / "report.json");
            f << report_to_json(report);
            std::cerr << "remote probe: " << client.cache_hits() << " cache hits, "
                      << client.network_calls() << " network calls\n";
            return 0;
        }
        if (report_cmd->parsed()) {
            std::ifstream in(rp_input);
            if (!in) throw Error("cannot open " + rp_input);
            std::stringstream buf;
            buf << in.rdbuf();
            const Report report = report_from_json(buf.str());
            std::filesystem::create_directories(rp_outdir);
            render_tables(report, rp_outdir);
            for (const auto& [source, r] : report.entailment) {
                std::string name = source;
                for (char& c : name) {
                    if (c == '/') c = '_';
                }
                render_heatmap(r.confusion, std::filesystem::path(rp_outdir) /
                                                ("entailment_confusion_" +
                                                 text::to_lower(name) + ".ppm"));
            }
            for (const MlmAggregate& agg : report.mlm) {
                render_heatmap(agg.confusion,
                               std::filesystem::path(rp_outdir) /
                                   ("mlm_confusion_" + text::to_lower(to_string(agg.variant)) +
                                    ".ppm"));
            }
            return 0;
        }
        if (run_cmd->parsed()) {
            return run(RunConfig::load(rn_config));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
