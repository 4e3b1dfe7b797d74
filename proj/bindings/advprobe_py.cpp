#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "advprobe/dataset_builder.hpp"
#include "advprobe/errors.hpp"
#include "advprobe/extraction.hpp"
#include "advprobe/metrics.hpp"
#include "advprobe/model_gateway.hpp"
#include "advprobe/probes.hpp"
#include "advprobe/scale_ranking.hpp"

namespace py = pybind11;
using namespace advprobe;

namespace {

// Lets Python implement a masked LM (e.g. over HuggingFace transformers).
class PyMaskedLmProvider : public MaskedLmProvider {
public:
    using MaskedLmProvider::MaskedLmProvider;
    std::vector<std::string> tokenize_word(const std::string& surface) const override {
        PYBIND11_OVERRIDE_PURE(std::vector<std::string>, MaskedLmProvider, tokenize_word, surface);
    }
    std::vector<std::pair<std::string, double>> mask_distribution(
        const std::string& text_with_masks, int mask_index) const override {
        using Dist = std::vector<std::pair<std::string, double>>;
        PYBIND11_OVERRIDE_PURE(Dist, MaskedLmProvider, mask_distribution, text_with_masks,
                               mask_index);
    }
};

class PyEmbeddingProvider : public EmbeddingProvider {
public:
    using EmbeddingProvider::EmbeddingProvider;
    size_t hidden_size() const override {
        PYBIND11_OVERRIDE_PURE(size_t, EmbeddingProvider, hidden_size);
    }
    std::vector<double> embed(const std::string& text, size_t begin, size_t end, int layer,
                              Pooling pooling) const override {
        PYBIND11_OVERRIDE_PURE(std::vector<double>, EmbeddingProvider, embed, text, begin, end,
                               layer, pooling);
    }
};

class PyNliProvider : public NliProvider {
public:
    using NliProvider::NliProvider;
    NliVerdict classify(const std::string& premise, const std::string& hypothesis) const override {
        PYBIND11_OVERRIDE_PURE(NliVerdict, NliProvider, classify, premise, hypothesis);
    }
};

py::dict counts_dict(const EntailmentCounts& c) {
    py::dict d;
    d["correct"] = c.correct;
    d["incorrect"] = c.incorrect;
    d["negation"] = c.negation;
    d["trivial"] = c.trivial;
    d["off_category"] = c.off_category;
    d["failed"] = c.failed;
    if (auto a = c.accuracy()) d["accuracy"] = *a;
    if (auto t = c.trivial_rate()) d["trivial_rate"] = *t;
    return d;
}

} // namespace

PYBIND11_MODULE(_advprobe, m) {
    m.doc() = "Probing toolkit for scalar adverb knowledge in language models";

    py::register_exception<Error>(m, "AdvprobeError");

    py::enum_<ScaleCategory>(m, "ScaleCategory")
        .value("MODALITY", ScaleCategory::MODALITY)
        .value("FREQUENCY", ScaleCategory::FREQUENCY)
        .value("DEGREE", ScaleCategory::DEGREE);

    py::enum_<ScaleOrder>(m, "ScaleOrder")
        .value("BELOW", ScaleOrder::BELOW)
        .value("ABOVE", ScaleOrder::ABOVE)
        .value("TIED", ScaleOrder::TIED)
        .value("INCOMPARABLE", ScaleOrder::INCOMPARABLE);

    py::class_<ScalarAdverb>(m, "ScalarAdverb")
        .def_readonly("surface", &ScalarAdverb::surface)
        .def_readonly("category", &ScalarAdverb::category)
        .def_readonly("gold_rank", &ScalarAdverb::gold_rank)
        .def_readonly("is_negation", &ScalarAdverb::is_negation)
        .def_readonly("is_target", &ScalarAdverb::is_target)
        .def_readonly("wordfreq_rel", &ScalarAdverb::wordfreq_rel)
        .def_readonly("reddit_rel", &ScalarAdverb::reddit_rel)
        .def("__repr__", [](const ScalarAdverb& a) { return "<ScalarAdverb " + a.surface + ">"; });

    py::class_<GoldScale>(m, "GoldScale")
        .def_readonly("category", &GoldScale::category)
        .def_readonly("ordering", &GoldScale::ordering)
        .def_readonly("top", &GoldScale::top)
        .def_readonly("bottom_nonneg", &GoldScale::bottom_nonneg);

    py::class_<Lexicon>(m, "Lexicon")
        .def_static("load", &Lexicon::load, py::arg("path"))
        .def("save", &Lexicon::save, py::arg("path"))
        .def("lookup", &Lexicon::lookup, py::arg("surface"),
             py::return_value_policy::reference_internal)
        .def("targets", py::overload_cast<>(&Lexicon::targets, py::const_),
             py::return_value_policy::reference_internal)
        .def("targets_in", py::overload_cast<ScaleCategory>(&Lexicon::targets, py::const_),
             py::arg("category"), py::return_value_policy::reference_internal)
        .def("scale", &Lexicon::scale, py::arg("category"),
             py::return_value_policy::reference_internal)
        .def("compare", &Lexicon::compare, py::arg("a"), py::arg("b"))
        .def("set_modality_bottom", &Lexicon::set_modality_bottom, py::arg("surface"));

    // metrics
    m.def(
        "pairwise_accuracy",
        [](std::vector<int> gold, std::vector<double> predicted) {
            return metrics::pairwise_accuracy({std::move(gold), std::move(predicted)});
        },
        py::arg("gold"), py::arg("predicted"));
    m.def(
        "spearman_rho",
        [](std::vector<int> gold, std::vector<double> predicted) {
            return metrics::spearman_rho({std::move(gold), std::move(predicted)});
        },
        py::arg("gold"), py::arg("predicted"));
    m.def(
        "kendall_tau_b",
        [](std::vector<int> gold, std::vector<double> predicted) {
            return metrics::kendall_tau_b({std::move(gold), std::move(predicted)});
        },
        py::arg("gold"), py::arg("predicted"));
    m.def(
        "mean_reciprocal_rank",
        [](const std::vector<int>& ranks) { return metrics::mean_reciprocal_rank(ranks); },
        py::arg("ranks"));

    // extraction
    py::class_<ProbeItem>(m, "ProbeItem")
        .def_readonly("source_id", &ProbeItem::source_id)
        .def_readonly("context", &ProbeItem::context)
        .def_readonly("adverb", &ProbeItem::adverb)
        .def_readonly("adjective", &ProbeItem::adjective)
        .def_readonly("mask_start", &ProbeItem::mask_start)
        .def_readonly("mask_end", &ProbeItem::mask_end)
        .def_readonly("word_count", &ProbeItem::word_count);

    m.def(
        "extract_items",
        [](const std::vector<std::pair<std::string, std::string>>& comments, const Lexicon& lexicon,
           int min_words, int max_words, int max_sentences) {
            std::vector<CorpusComment> corpus;
            for (const auto& [id, body] : comments) corpus.push_back({id, body, "", {}});
            ExtractOptions options;
            options.min_words = min_words;
            options.max_words = max_words;
            options.max_sentences = max_sentences;
            const RuleParseProvider provider(lexicon);
            return extract_items(corpus, lexicon, provider, options);
        },
        py::arg("comments"), py::arg("lexicon"), py::arg("min_words") = 10,
        py::arg("max_words") = 40, py::arg("max_sentences") = 2,
        "Extract sentence-final ADV ADJ probe items from (id, text) pairs using the built-in "
        "rule-based parser.");

    // dataset building
    py::enum_<Variant>(m, "Variant")
        .value("FULL_CONTEXT", Variant::FULL_CONTEXT)
        .value("NEUTRAL", Variant::NEUTRAL);
    py::enum_<Condition>(m, "Condition")
        .value("BELOW", Condition::BELOW)
        .value("ABOVE", Condition::ABOVE);
    py::enum_<FreqBin>(m, "FreqBin")
        .value("PSEUDO", FreqBin::PSEUDO)
        .value("LOW", FreqBin::LOW)
        .value("MED", FreqBin::MED)
        .value("HIGH", FreqBin::HIGH);
    py::enum_<NliLabel>(m, "NliLabel")
        .value("ENTAILMENT", NliLabel::ENTAILMENT)
        .value("CONTRADICTION", NliLabel::CONTRADICTION);

    py::class_<MaskedInstance>(m, "MaskedInstance")
        .def_readonly("id", &MaskedInstance::id)
        .def_readonly("text_with_mask", &MaskedInstance::text_with_mask)
        .def_readonly("target", &MaskedInstance::target)
        .def_readonly("adjective", &MaskedInstance::adjective)
        .def_readonly("variant", &MaskedInstance::variant);

    py::class_<EntailmentTemplate>(m, "EntailmentTemplate")
        .def_readonly("id", &EntailmentTemplate::id)
        .def_readonly("condition", &EntailmentTemplate::condition)
        .def_readonly("pattern", &EntailmentTemplate::pattern)
        .def_readonly("expected_direction", &EntailmentTemplate::expected_direction);

    py::class_<PoolEntry>(m, "PoolEntry")
        .def_readonly("adjective", &PoolEntry::adjective)
        .def_readonly("bin", &PoolEntry::bin)
        .def_readonly("log_freq", &PoolEntry::log_freq);

    py::class_<AdjectivePool>(m, "AdjectivePool")
        .def_static("load", &AdjectivePool::load, py::arg("path"))
        .def_readonly("entries", &AdjectivePool::entries);

    py::class_<EntailmentItem>(m, "EntailmentItem")
        .def_readonly("id", &EntailmentItem::id)
        .def_readonly("template_id", &EntailmentItem::template_id)
        .def_readonly("condition", &EntailmentItem::condition)
        .def_readonly("premise", &EntailmentItem::premise)
        .def_readonly("adjective", &EntailmentItem::adjective)
        .def_readonly("bin", &EntailmentItem::bin)
        .def_readonly("surface", &EntailmentItem::surface);

    py::class_<NliPair>(m, "NliPair")
        .def_readonly("premise_sentence", &NliPair::premise_sentence)
        .def_readonly("hypothesis_sentence", &NliPair::hypothesis_sentence)
        .def_readonly("label", &NliPair::label)
        .def_readonly("premise_adverb", &NliPair::premise_adverb)
        .def_readonly("hypothesis_adverb", &NliPair::hypothesis_adverb)
        .def_readonly("adjective", &NliPair::adjective)
        .def_readonly("bin", &NliPair::bin)
        .def_readonly("condition", &NliPair::condition);

    m.def("load_templates", &load_templates, py::arg("path"));
    m.def("apply_paper_exact", &apply_paper_exact, py::arg("templates"));
    m.def("build_mlm_items",
          [](const std::vector<ProbeItem>& items) { return build_mlm_items(items); },
          py::arg("items"));
    m.def(
        "eligible_premises",
        [](const Lexicon& lexicon, Condition condition,
           const std::set<std::string>& extra_excluded_below,
           const std::set<std::string>& extra_excluded_above) {
            EligibilityOptions options;
            options.extra_excluded_below = extra_excluded_below;
            options.extra_excluded_above = extra_excluded_above;
            std::vector<std::string> out;
            for (const ScalarAdverb* a : eligible_premises(lexicon, condition, options)) {
                out.push_back(a->surface);
            }
            return out;
        },
        py::arg("lexicon"), py::arg("condition"),
        py::arg("extra_excluded_below") = std::set<std::string>{},
        py::arg("extra_excluded_above") = std::set<std::string>{});
    m.def(
        "generate_entailment",
        [](const std::vector<EntailmentTemplate>& templates, const AdjectivePool& pool,
           const Lexicon& lexicon, const std::set<std::string>& extra_excluded_below,
           const std::set<std::string>& extra_excluded_above) {
            EligibilityOptions options;
            options.extra_excluded_below = extra_excluded_below;
            options.extra_excluded_above = extra_excluded_above;
            return generate_entailment(templates, pool, lexicon, options);
        },
        py::arg("templates"), py::arg("pool"), py::arg("lexicon"),
        py::arg("extra_excluded_below") = std::set<std::string>{},
        py::arg("extra_excluded_above") = std::set<std::string>{});
    m.def(
        "to_nli",
        [](const std::vector<EntailmentItem>& items,
           const std::vector<EntailmentTemplate>& templates, const Lexicon& lexicon,
           uint64_t seed) { return to_nli(items, templates, lexicon, seed); },
        py::arg("items"), py::arg("templates"), py::arg("lexicon"), py::arg("seed"));

    // model gateway
    py::enum_<Pooling>(m, "Pooling")
        .value("MEAN_SUBTOKENS", Pooling::MEAN_SUBTOKENS)
        .value("FIRST_SUBTOKEN", Pooling::FIRST_SUBTOKEN);

    py::class_<NliVerdict>(m, "NliVerdict")
        .def(py::init([](double e, double n, double c) {
                 NliVerdict v{e, n, c};
                 v.validate();
                 return v;
             }),
             py::arg("entailment"), py::arg("neutral"), py::arg("contradiction"))
        .def_readonly("entailment", &NliVerdict::entailment)
        .def_readonly("neutral", &NliVerdict::neutral)
        .def_readonly("contradiction", &NliVerdict::contradiction);

    py::class_<MaskedLmProvider, PyMaskedLmProvider, std::shared_ptr<MaskedLmProvider>>(
        m, "MaskedLmProvider")
        .def(py::init<>())
        .def("tokenize_word", &MaskedLmProvider::tokenize_word)
        .def("mask_distribution", &MaskedLmProvider::mask_distribution);

    py::class_<EmbeddingProvider, PyEmbeddingProvider, std::shared_ptr<EmbeddingProvider>>(
        m, "EmbeddingProvider")
        .def(py::init<>())
        .def("hidden_size", &EmbeddingProvider::hidden_size)
        .def("embed", &EmbeddingProvider::embed);

    py::class_<NliProvider, PyNliProvider, std::shared_ptr<NliProvider>>(m, "NliProvider")
        .def(py::init<>())
        .def("classify", &NliProvider::classify);

    py::class_<SyntheticEmbeddingProvider, EmbeddingProvider,
               std::shared_ptr<SyntheticEmbeddingProvider>>(m, "SyntheticEmbeddingProvider")
        .def(py::init<const Lexicon&, size_t, double>(), py::arg("lexicon"), py::arg("dims") = 16,
             py::arg("max_angle") = 1.0, py::keep_alive<1, 2>());

    py::class_<RankedCompletions>(m, "RankedCompletions")
        .def_readonly("query_id", &RankedCompletions::query_id)
        .def_readonly("candidates", &RankedCompletions::candidates);

    py::class_<MaskGateway>(m, "MaskGateway")
        .def(py::init([](std::shared_ptr<MaskedLmProvider> provider) {
                 return MaskGateway(std::move(provider));
             }),
             py::arg("provider"))
        .def("fill_mask_topk", &MaskGateway::fill_mask_topk, py::arg("text_with_mask"),
             py::arg("k"))
        .def(
            "score_candidates",
            [](const MaskGateway& g, const std::string& text,
               const std::vector<std::string>& candidates) {
                py::dict out;
                for (const auto& [surface, sc] : g.score_candidates(text, candidates)) {
                    out[py::str(surface)] = py::make_tuple(sc.log_prob, sc.multi_token);
                }
                return out;
            },
            py::arg("text_with_mask"), py::arg("candidates"));

    // probes
    py::enum_<NegVariant>(m, "NegVariant")
        .value("WITH_NEG", NegVariant::WITH_NEG)
        .value("NO_NEG", NegVariant::NO_NEG);

    py::class_<MlmResult>(m, "MlmResult")
        .def("summary", [](const MlmResult& r) {
            py::list out;
            for (const MlmAggregate& agg : r.aggregates) {
                py::dict d;
                d["variant"] = to_string(agg.variant);
                d["mrr"] = agg.overall.mrr;
                d["beat_not_accuracy"] = agg.overall.beat_not_accuracy;
                d["n"] = agg.overall.n;
                d["failed"] = agg.overall.failed;
                out.append(d);
            }
            return out;
        });

    py::class_<EntailmentResult>(m, "EntailmentResult")
        .def("overall", [](const EntailmentResult& r) { return counts_dict(r.overall); })
        .def("by_condition", [](const EntailmentResult& r) {
            py::dict out;
            for (const auto& [cond, counts] : r.by_condition) {
                out[py::str(to_string(cond))] = counts_dict(counts);
            }
            return out;
        });

    py::class_<NliProbeResult>(m, "NliProbeResult")
        .def_readonly("n", &NliProbeResult::n)
        .def_readonly("correct", &NliProbeResult::correct)
        .def("accuracy", [](const NliProbeResult& r) { return r.accuracy().value_or(-1.0); });

    m.def(
        "run_mlm_probe",
        [](const std::vector<MaskedInstance>& instances, std::shared_ptr<MaskedLmProvider> provider,
           const Lexicon& lexicon) {
            const MaskGateway gateway(std::move(provider));
            return run_mlm_probe(instances, gateway, lexicon);
        },
        py::arg("instances"), py::arg("provider"), py::arg("lexicon"));
    m.def(
        "run_entailment_probe",
        [](const std::vector<EntailmentItem>& items,
           const std::vector<EntailmentTemplate>& templates,
           std::shared_ptr<MaskedLmProvider> provider, NegVariant variant, const Lexicon& lexicon) {
            const MaskGateway gateway(std::move(provider));
            return run_entailment_probe(items, templates, gateway, variant, lexicon);
        },
        py::arg("items"), py::arg("templates"), py::arg("provider"), py::arg("variant"),
        py::arg("lexicon"));
    m.def("run_random_baseline", &run_random_baseline, py::arg("items"), py::arg("templates"),
          py::arg("lexicon"), py::arg("seed"), py::arg("variant") = NegVariant::WITH_NEG);
    m.def(
        "run_nli_probe",
        [](const std::vector<NliPair>& pairs, const NliProvider& provider) {
            return run_nli_probe(pairs, provider);
        },
        py::arg("pairs"), py::arg("provider"));
    m.def(
        "gold_oracle_nli",
        [](const Lexicon& lexicon) {
            return std::shared_ptr<NliProvider>(std::make_shared<GoldOracleNli>(lexicon));
        },
        py::arg("lexicon"), py::keep_alive<0, 1>());

    // scale ranking
    py::enum_<RankMethod>(m, "RankMethod")
        .value("SIM", RankMethod::SIM)
        .value("DIFF", RankMethod::DIFF)
        .value("ADJDIFF", RankMethod::ADJDIFF);

    py::class_<RankingResult>(m, "RankingResult")
        .def_readonly("category", &RankingResult::category)
        .def_readonly("method", &RankingResult::method)
        .def_readonly("scores", &RankingResult::scores)
        .def_readonly("predicted_order", &RankingResult::predicted_order);

    py::class_<RankingEvaluation>(m, "RankingEvaluation")
        .def_readonly("pairwise_accuracy", &RankingEvaluation::pairwise_accuracy)
        .def_readonly("spearman_rho", &RankingEvaluation::spearman_rho)
        .def_readonly("kendall_tau_b", &RankingEvaluation::kendall_tau_b)
        .def_readonly("n", &RankingEvaluation::n);

    py::class_<ScaleRanker>(m, "ScaleRanker")
        .def(py::init([](const Lexicon& lexicon, const EmbeddingProvider& provider,
                         std::vector<std::string> frames) {
                 return ScaleRanker(lexicon, provider, std::move(frames));
             }),
             py::arg("lexicon"), py::arg("provider"), py::arg("frames"), py::keep_alive<1, 2>(),
             py::keep_alive<1, 3>())
        .def("rank", &ScaleRanker::rank, py::arg("method"), py::arg("category"))
        .def("evaluate", &ScaleRanker::evaluate, py::arg("result"));

    m.def("load_frame_adjectives", &load_frame_adjectives, py::arg("path"));
}
