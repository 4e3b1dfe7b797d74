#include "advprobe/probes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <tuple>

#include <json.hpp>

#include "advprobe/errors.hpp"
#include "advprobe/rng.hpp"
#include "advprobe/text.hpp"

namespace advprobe {

void ConfusionMatrix::increment(const std::string& row, const std::string& col) {
    auto r = std::find(row_labels.begin(), row_labels.end(), row);
    auto c = std::find(col_labels.begin(), col_labels.end(), col);
    if (r == row_labels.end() || c == col_labels.end()) return;
    counts[static_cast<size_t>(r - row_labels.begin())][static_cast<size_t>(c - col_labels.begin())]++;
}

int ConfusionMatrix::row_total(size_t row) const {
    return std::accumulate(counts[row].begin(), counts[row].end(), 0);
}

ConfusionMatrix make_target_confusion(const Lexicon& lexicon) {
    ConfusionMatrix m;
    for (ScaleCategory c : kAllCategories) {
        for (const auto& group : lexicon.scale(c).ordering) {
            for (const std::string& w : group) m.row_labels.push_back(w);
        }
    }
    m.col_labels = m.row_labels;
    m.col_labels.push_back("not");
    m.col_labels.push_back("OTHER");
    m.counts.assign(m.row_labels.size(), std::vector<int>(m.col_labels.size(), 0));
    return m;
}

// ---- MLM probe --------------------------------------------------------------

namespace {

// First lexicon word (the 24 targets plus `not`) among the top completions.
std::string first_lexicon_match(const RankedCompletions& completions, const Lexicon& lexicon,
                                bool skip_negations, int top_k) {
    int seen = 0;
    for (const auto& [surface, lp] : completions.candidates) {
        if (seen++ >= top_k) break;
        const ScalarAdverb* entry = lexicon.find(surface);
        if (!entry) continue;
        if (!entry->is_target && entry->surface != "not") continue;
        if (skip_negations && entry->is_negation) continue;
        return entry->surface;
    }
    return "OTHER";
}

struct MlmAccumulator {
    double rr_sum = 0.0;
    int beat = 0;
    int n = 0;
    int failed = 0;
    int multi = 0;

    void finish(MlmCell& cell) const {
        cell.n = n;
        cell.failed = failed;
        cell.multi_token = multi;
        cell.mrr = n > 0 ? rr_sum / n : 0.0;
        cell.beat_not_accuracy = n > 0 ? static_cast<double>(beat) / n : 0.0;
    }
};

} // namespace

MlmResult run_mlm_probe(const std::vector<MaskedInstance>& instances, const MaskGateway& gateway,
                        const Lexicon& lexicon, const MlmProbeOptions& options) {
    MlmResult result;
    std::map<Variant, std::array<MlmAccumulator, 3>> cat_acc;
    std::map<Variant, MlmAccumulator> overall_acc;
    std::map<Variant, ConfusionMatrix> confusion;

    for (const MaskedInstance& inst : instances) {
        MlmVerdict v;
        v.item_id = inst.id;
        v.target = inst.target;
        v.variant = inst.variant;
        const ScalarAdverb& target = lexicon.lookup(inst.target);
        if (!target.category) throw ValidationError("MLM target without category: " + inst.target);
        v.category = *target.category;

        if (!confusion.count(inst.variant)) confusion[inst.variant] = make_target_confusion(lexicon);
        MlmAccumulator& overall = overall_acc[inst.variant];
        MlmAccumulator& per_cat = cat_acc[inst.variant][static_cast<size_t>(v.category)];

        try {
            const MaskProbeResult probe =
                gateway.probe(inst.text_with_mask, inst.target, options.top_k);
            v.target_rank = probe.target_rank;
            v.reciprocal_rank = 1.0 / static_cast<double>(probe.target_rank);
            v.beat_not = probe.target_log_prob > probe.not_log_prob;
            v.multi_token = probe.target_multi_token;
            v.top_target_match = first_lexicon_match(probe.top, lexicon, false, options.top_k);
        } catch (const std::exception& e) {
            v.failed = true;
            v.error = e.what();
        }

        if (v.failed) {
            ++overall.failed;
            ++per_cat.failed;
        } else {
            overall.rr_sum += v.reciprocal_rank;
            overall.beat += v.beat_not ? 1 : 0;
            overall.n += 1;
            overall.multi += v.multi_token ? 1 : 0;
            per_cat.rr_sum += v.reciprocal_rank;
            per_cat.beat += v.beat_not ? 1 : 0;
            per_cat.n += 1;
            per_cat.multi += v.multi_token ? 1 : 0;
            confusion[inst.variant].increment(v.target, v.top_target_match);
        }
        result.verdicts.push_back(std::move(v));
    }

    for (Variant variant : {Variant::FULL_CONTEXT, Variant::NEUTRAL}) {
        if (!overall_acc.count(variant)) continue;
        MlmAggregate agg;
        agg.variant = variant;
        overall_acc[variant].finish(agg.overall);
        for (size_t c = 0; c < 3; ++c) cat_acc[variant][c].finish(agg.per_category[c]);
        agg.confusion = std::move(confusion[variant]);
        result.aggregates.push_back(std::move(agg));
    }
    return result;
}

void write_mlm_verdicts_jsonl(const std::filesystem::path& path,
                              const std::vector<MlmVerdict>& verdicts) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write verdicts: " + path.string());
    for (const MlmVerdict& v : verdicts) {
        nlohmann::ordered_json j;
        j["item_id"] = v.item_id;
        j["target"] = v.target;
        j["category"] = to_string(v.category);
        j["variant"] = to_string(v.variant);
        if (v.failed) {
            j["failed"] = true;
            j["error"] = v.error;
        } else {
            j["target_rank"] = v.target_rank;
            j["reciprocal_rank"] = v.reciprocal_rank;
            j["beat_not"] = v.beat_not;
            j["top_target_match"] = v.top_target_match;
            j["multi_token"] = v.multi_token;
        }
        out << j.dump() << '\n';
    }
}

// ---- Entailment probe ----------------------------------------------------------

std::string to_string(Classification c) {
    switch (c) {
        case Classification::CORRECT: return "CORRECT";
        case Classification::INCORRECT: return "INCORRECT";
        case Classification::TRIVIAL: return "TRIVIAL";
        case Classification::NEGATION: return "NEGATION";
        case Classification::OFF_CATEGORY: return "OFF_CATEGORY";
        case Classification::FAILED: return "FAILED";
    }
    return "?";
}

std::string to_string(NegVariant v) { return v == NegVariant::WITH_NEG ? "WITH_NEG" : "NO_NEG"; }

NegVariant parse_neg_variant(std::string_view s) {
    if (s == "WITH_NEG" || s == "with-neg") return NegVariant::WITH_NEG;
    if (s == "NO_NEG" || s == "no-neg") return NegVariant::NO_NEG;
    throw ParseError("unknown variant: " + std::string(s));
}

std::optional<double> EntailmentCounts::accuracy() const {
    const int denom = correct + incorrect + negation;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(correct) / denom;
}

std::optional<double> EntailmentCounts::trivial_rate() const {
    const int denom = classified();
    if (denom == 0) return std::nullopt;
    return static_cast<double>(trivial) / denom;
}

void EntailmentCounts::add(Classification c) {
    switch (c) {
        case Classification::CORRECT: ++correct; break;
        case Classification::INCORRECT: ++incorrect; break;
        case Classification::TRIVIAL: ++trivial; break;
        case Classification::NEGATION: ++negation; break;
        case Classification::OFF_CATEGORY: ++off_category; break;
        case Classification::FAILED: ++failed; break;
    }
}

EntailmentVerdict classify_entailment_answer(const EntailmentItem& item,
                                             const EntailmentTemplate& tmpl,
                                             const RankedCompletions& completions,
                                             NegVariant variant, const Lexicon& lexicon) {
    if (completions.candidates.empty()) throw InputError("empty completion list");
    EntailmentVerdict v;
    v.item_id = item.id;
    v.variant = variant;
    v.answer = first_lexicon_match(completions, lexicon, variant == NegVariant::NO_NEG, 10);
    if (v.answer == "OTHER") {
        v.classification = Classification::OFF_CATEGORY;
        return v;
    }
    const ScaleOrder order = lexicon.compare(v.answer, item.premise);
    if (order == ScaleOrder::TIED) {
        v.classification = Classification::TRIVIAL;
    } else if (lexicon.is_negation_answer(v.answer)) {
        v.classification = Classification::NEGATION;
    } else if (order == ScaleOrder::INCOMPARABLE) {
        v.classification = Classification::OFF_CATEGORY;
    } else if (order == tmpl.expected_direction) {
        v.classification = Classification::CORRECT;
    } else {
        v.classification = Classification::INCORRECT;
    }
    return v;
}

namespace {

struct EntailmentAccumulator {
    EntailmentResult result;

    explicit EntailmentAccumulator(NegVariant variant, const Lexicon& lexicon) {
        result.variant = variant;
        result.confusion = make_target_confusion(lexicon);
    }

    void add(const EntailmentItem& item, const EntailmentTemplate& tmpl,
             EntailmentVerdict verdict) {
        const Classification c = verdict.classification;
        result.overall.add(c);
        result.by_bin_condition[{item.bin, item.condition}].add(c);
        result.by_template[item.template_id].add(c);
        result.by_mask_position[tmpl.mask_position].add(c);
        result.by_condition[item.condition].add(c);
        if (c != Classification::FAILED) {
            result.confusion.increment(item.premise, verdict.answer);
        }
        result.verdicts.push_back(std::move(verdict));
    }
};

} // namespace

EntailmentResult run_entailment_probe(const std::vector<EntailmentItem>& items,
                                      const std::vector<EntailmentTemplate>& templates,
                                      const MaskGateway& gateway, NegVariant variant,
                                      const Lexicon& lexicon, int top_k) {
    EntailmentAccumulator acc(variant, lexicon);
    for (const EntailmentItem& item : items) {
        const EntailmentTemplate& tmpl = template_by_id(templates, item.template_id);
        EntailmentVerdict v;
        try {
            const RankedCompletions completions = gateway.fill_mask_topk(item.surface, top_k);
            v = classify_entailment_answer(item, tmpl, completions, variant, lexicon);
        } catch (const std::exception& e) {
            v.item_id = item.id;
            v.variant = variant;
            v.classification = Classification::FAILED;
            v.error = e.what();
        }
        acc.add(item, tmpl, std::move(v));
    }
    return std::move(acc.result);
}

EntailmentResult run_random_baseline(const std::vector<EntailmentItem>& items,
                                     const std::vector<EntailmentTemplate>& templates,
                                     const Lexicon& lexicon, uint64_t seed, NegVariant variant) {
    Rng rng(seed);
    EntailmentAccumulator acc(variant, lexicon);
    for (const EntailmentItem& item : items) {
        const EntailmentTemplate& tmpl = template_by_id(templates, item.template_id);
        const ScalarAdverb& premise = lexicon.lookup(item.premise);
        std::vector<std::string> pool;
        for (const ScalarAdverb* a : lexicon.targets(*premise.category)) {
            if (variant == NegVariant::NO_NEG && a->is_negation) continue;
            pool.push_back(a->surface);
        }
        RankedCompletions completions;
        completions.candidates = {{rng.pick(pool), 0.0}};
        acc.add(item, tmpl, classify_entailment_answer(item, tmpl, completions, variant, lexicon));
    }
    return std::move(acc.result);
}

void write_entailment_verdicts_jsonl(const std::filesystem::path& path,
                                     const std::vector<EntailmentVerdict>& verdicts) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write verdicts: " + path.string());
    for (const EntailmentVerdict& v : verdicts) {
        nlohmann::ordered_json j;
        j["item_id"] = v.item_id;
        j["variant"] = to_string(v.variant);
        j["answer"] = v.answer;
        j["classification"] = to_string(v.classification);
        if (!v.error.empty()) j["error"] = v.error;
        out << j.dump() << '\n';
    }
}

// ---- NLI probe ------------------------------------------------------------------

std::optional<double> NliProbeResult::accuracy() const {
    if (n == 0) return std::nullopt;
    return static_cast<double>(correct) / n;
}

std::optional<double> NliProbeResult::bin_accuracy(FreqBin b) const {
    auto it = per_bin.find(b);
    if (it == per_bin.end() || it->second.second == 0) return std::nullopt;
    return static_cast<double>(it->second.first) / it->second.second;
}

NliProbeResult run_nli_probe(const std::vector<NliPair>& pairs, const NliProvider& provider) {
    NliProbeResult result;
    for (const NliPair& pair : pairs) {
        NliItemVerdict v;
        v.item_id = pair.item_id;
        v.gold = pair.label;
        try {
            const NliVerdict verdict = provider.classify(pair.premise_sentence,
                                                         pair.hypothesis_sentence);
            verdict.validate();
            v.predicted = verdict.argmax();
        } catch (const std::exception&) {
            v.failed = true;
        }
        if (v.failed) {
            ++result.failed;
        } else {
            const bool correct =
                (v.gold == NliLabel::ENTAILMENT && v.predicted == NliLabel3::ENTAILMENT) ||
                (v.gold == NliLabel::CONTRADICTION && v.predicted == NliLabel3::CONTRADICTION);
            ++result.n;
            result.correct += correct ? 1 : 0;
            auto& [bin_correct, bin_n] = result.per_bin[pair.bin];
            bin_n += 1;
            bin_correct += correct ? 1 : 0;
            const size_t row = pair.label == NliLabel::ENTAILMENT ? 0 : 1;
            result.confusion[row][static_cast<size_t>(v.predicted)] += 1;
        }
        result.verdicts.push_back(v);
    }
    return result;
}

// ---- Remote completion probe -------------------------------------------------------

std::vector<EntailmentItem> stratified_sample(const std::vector<EntailmentItem>& items,
                                              size_t sample_size, uint64_t seed) {
    if (sample_size > items.size()) {
        throw InputError("sample size " + std::to_string(sample_size) + " exceeds dataset size " +
                         std::to_string(items.size()));
    }
    std::map<std::tuple<int, int, int>, std::vector<size_t>> strata;
    for (size_t i = 0; i < items.size(); ++i) {
        strata[{static_cast<int>(items[i].bin), static_cast<int>(items[i].condition),
                items[i].template_id}]
            .push_back(i);
    }
    const size_t cells = strata.size();
    const size_t base = sample_size / cells;
    size_t remainder = sample_size % cells;

    Rng rng(seed);
    std::vector<size_t> chosen;
    for (auto& [key, indices] : strata) {
        size_t quota = base + (remainder > 0 ? 1 : 0);
        if (remainder > 0) --remainder;
        if (quota > indices.size()) {
            throw InputError("stratum smaller than its quota; reduce the sample size");
        }
        rng.shuffle(indices);
        chosen.insert(chosen.end(), indices.begin(), indices.begin() + static_cast<long>(quota));
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<EntailmentItem> out;
    out.reserve(chosen.size());
    for (size_t i : chosen) out.push_back(items[i]);
    return out;
}

std::string remote_prompt_v1(const std::string& surface) {
    return "Fill in the [MASK] in the sentence below with a single English word.\nSentence: " +
           surface + "\nThe best word for [MASK] is:";
}

EntailmentResult run_remote_probe(const std::vector<EntailmentItem>& items,
                                  const std::vector<EntailmentTemplate>& templates,
                                  CompletionClient& client, const Lexicon& lexicon,
                                  const RemoteProbeOptions& options) {
    const std::vector<EntailmentItem> sample =
        stratified_sample(items, options.sample_size, options.seed);
    std::vector<std::string> prompts;
    prompts.reserve(sample.size());
    for (const EntailmentItem& item : sample) prompts.push_back(remote_prompt_v1(item.surface));

    const auto batches = client.complete_batch(prompts, options.completions);

    EntailmentAccumulator acc(options.variant, lexicon);
    for (size_t i = 0; i < sample.size(); ++i) {
        const EntailmentItem& item = sample[i];
        const EntailmentTemplate& tmpl = template_by_id(templates, item.template_id);
        EntailmentVerdict v;
        if (!batches[i].ok()) {
            v.item_id = item.id;
            v.variant = options.variant;
            v.classification = Classification::FAILED;
            v.error = batches[i].error;
        } else {
            RankedCompletions completions;
            completions.query_id = item.id;
            double pseudo_lp = 0.0;
            for (const std::string& raw : batches[i].completions) {
                const std::string word = CompletionClient::first_word_lower(raw);
                if (word.empty()) continue;
                completions.candidates.push_back({word, pseudo_lp});
                pseudo_lp -= 1.0;
            }
            if (completions.candidates.empty()) {
                v.item_id = item.id;
                v.variant = options.variant;
                v.classification = Classification::OFF_CATEGORY;
                v.answer = "OTHER";
            } else {
                v = classify_entailment_answer(item, tmpl, completions, options.variant, lexicon);
            }
        }
        acc.add(item, tmpl, std::move(v));
    }
    return std::move(acc.result);
}

} // namespace advprobe
