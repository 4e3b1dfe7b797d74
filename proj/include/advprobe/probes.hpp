#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "advprobe/dataset_builder.hpp"
#include "advprobe/lexicon.hpp"
#include "advprobe/model_gateway.hpp"
#include "advprobe/remote.hpp"

namespace advprobe {

// Confusion counts with fixed, category-grouped row/column order.
struct ConfusionMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<int>> counts;

    void increment(const std::string& row, const std::string& col);
    int row_total(size_t row) const;
};

// Rows: the 24 targets in category gold order. Columns: the same plus `not`
// and OTHER.
ConfusionMatrix make_target_confusion(const Lexicon& lexicon);

// ---- MLM probe --------------------------------------------------------------

struct MlmVerdict {
    std::string item_id;
    std::string target;
    ScaleCategory category = ScaleCategory::MODALITY;
    Variant variant = Variant::FULL_CONTEXT;
    int target_rank = 0;          // 1-based full-vocabulary rank
    double reciprocal_rank = 0.0; // 1/target_rank
    bool beat_not = false;        // strict: score(target) > score(not)
    std::string top_target_match; // first lexicon adverb in top-10, else OTHER
    bool multi_token = false;
    bool failed = false;
    std::string error;
};

struct MlmCell {
    double mrr = 0.0;
    double beat_not_accuracy = 0.0;
    int n = 0;
    int failed = 0;
    int multi_token = 0;
};

struct MlmAggregate {
    Variant variant = Variant::FULL_CONTEXT;
    std::array<MlmCell, 3> per_category{}; // indexed by ScaleCategory
    MlmCell overall;
    ConfusionMatrix confusion;
};

struct MlmResult {
    std::vector<MlmVerdict> verdicts;
    std::vector<MlmAggregate> aggregates; // one per variant present, FULL_CONTEXT first
};

struct MlmProbeOptions {
    int top_k = 10;
};

MlmResult run_mlm_probe(const std::vector<MaskedInstance>& instances, const MaskGateway& gateway,
                        const Lexicon& lexicon, const MlmProbeOptions& options = {});

void write_mlm_verdicts_jsonl(const std::filesystem::path& path,
                              const std::vector<MlmVerdict>& verdicts);

// ---- Entailment probe ---------------------------------------------------------

enum class Classification { CORRECT, INCORRECT, TRIVIAL, NEGATION, OFF_CATEGORY, FAILED };
std::string to_string(Classification c);

enum class NegVariant { WITH_NEG, NO_NEG };
std::string to_string(NegVariant v);
NegVariant parse_neg_variant(std::string_view s);

struct EntailmentVerdict {
    std::string item_id;
    std::string answer; // lexicon surface or OTHER
    Classification classification = Classification::FAILED;
    NegVariant variant = NegVariant::WITH_NEG;
    std::string error;
};

struct EntailmentCounts {
    int correct = 0;
    int incorrect = 0;
    int negation = 0;
    int trivial = 0;
    int off_category = 0;
    int failed = 0;

    int classified() const { return correct + incorrect + negation + trivial + off_category; }
    // CORRECT / (CORRECT + INCORRECT + NEGATION); trivial and off-category
    // answers stay out of the denominator.
    std::optional<double> accuracy() const;
    std::optional<double> trivial_rate() const; // TRIVIAL / classified
    void add(Classification c);
};

struct EntailmentResult {
    NegVariant variant = NegVariant::WITH_NEG;
    std::vector<EntailmentVerdict> verdicts;
    EntailmentCounts overall;
    std::map<std::pair<FreqBin, Condition>, EntailmentCounts> by_bin_condition;
    std::map<int, EntailmentCounts> by_template;
    std::map<MaskPosition, EntailmentCounts> by_mask_position;
    std::map<Condition, EntailmentCounts> by_condition;
    ConfusionMatrix confusion; // premise adverb x answered adverb
};

// Scans the top-10 completions for the first lexicon word (negations included
// under WITH_NEG, skipped under NO_NEG), then classifies it against the
// premise and the template's expected direction.
EntailmentVerdict classify_entailment_answer(const EntailmentItem& item,
                                             const EntailmentTemplate& tmpl,
                                             const RankedCompletions& completions,
                                             NegVariant variant, const Lexicon& lexicon);

EntailmentResult run_entailment_probe(const std::vector<EntailmentItem>& items,
                                      const std::vector<EntailmentTemplate>& templates,
                                      const MaskGateway& gateway, NegVariant variant,
                                      const Lexicon& lexicon, int top_k = 10);

// Baseline that answers every item with a uniform draw from the item
// category's target adverbs (negations excluded from the pool under NO_NEG),
// classified exactly like model answers.
EntailmentResult run_random_baseline(const std::vector<EntailmentItem>& items,
                                     const std::vector<EntailmentTemplate>& templates,
                                     const Lexicon& lexicon, uint64_t seed,
                                     NegVariant variant = NegVariant::WITH_NEG);

void write_entailment_verdicts_jsonl(const std::filesystem::path& path,
                                     const std::vector<EntailmentVerdict>& verdicts);

// ---- NLI probe ----------------------------------------------------------------

struct NliItemVerdict {
    std::string item_id;
    NliLabel gold = NliLabel::ENTAILMENT;
    NliLabel3 predicted = NliLabel3::NEUTRAL;
    bool failed = false;
};

struct NliProbeResult {
    int n = 0;
    int correct = 0;
    int failed = 0;
    std::map<FreqBin, std::pair<int, int>> per_bin; // correct, n
    // rows: gold ENTAILMENT, CONTRADICTION; cols: predicted E/N/C
    std::array<std::array<int, 3>, 2> confusion{};
    std::vector<NliItemVerdict> verdicts;

    std::optional<double> accuracy() const;
    std::optional<double> bin_accuracy(FreqBin b) const;
};

// NEUTRAL predictions count as incorrect for both gold labels.
NliProbeResult run_nli_probe(const std::vector<NliPair>& pairs, const NliProvider& provider);

// ---- Remote completion probe ----------------------------------------------------

// Deterministic stratified sample over (bin, condition, template) cells;
// returns exactly sample_size items in dataset order.
std::vector<EntailmentItem> stratified_sample(const std::vector<EntailmentItem>& items,
                                              size_t sample_size, uint64_t seed);

// Prompt wrapping one generated sentence for a completion-only model. This is
// a documented reconstruction; v1 is pinned so cached responses stay valid.
std::string remote_prompt_v1(const std::string& surface);

struct RemoteProbeOptions {
    size_t sample_size = 5120;
    uint64_t seed = 0;
    int completions = 10;
    NegVariant variant = NegVariant::WITH_NEG;
};

EntailmentResult run_remote_probe(const std::vector<EntailmentItem>& items,
                                  const std::vector<EntailmentTemplate>& templates,
                                  CompletionClient& client, const Lexicon& lexicon,
                                  const RemoteProbeOptions& options);

} // namespace advprobe
