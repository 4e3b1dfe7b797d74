#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "advprobe/extraction.hpp"
#include "advprobe/lexicon.hpp"

namespace advprobe {

inline constexpr const char* kMaskToken = "[MASK]";

enum class Variant { FULL_CONTEXT, NEUTRAL };
std::string to_string(Variant v);
Variant parse_variant(std::string_view s);

struct MaskedInstance {
    std::string id;
    std::string text_with_mask; // exactly one [MASK]
    std::string target;         // adverb surface
    std::string adjective;
    Variant variant = Variant::FULL_CONTEXT;
};

struct MlmBuildStats {
    size_t rejected = 0;
};

// One FULL_CONTEXT instance (adverb span replaced by [MASK]) and one NEUTRAL
// instance ("is [MASK] {adjective}.") per probe item. Items whose mask span
// does not cover their adverb are rejected with a diagnostic.
std::vector<MaskedInstance> build_mlm_items(const std::vector<ProbeItem>& items,
                                            MlmBuildStats* stats = nullptr);

void write_mlm_jsonl(const std::filesystem::path& path, const std::vector<MaskedInstance>& v);
std::vector<MaskedInstance> read_mlm_jsonl(const std::filesystem::path& path);

enum class Condition { BELOW, ABOVE };
std::string to_string(Condition c);
Condition parse_condition(std::string_view s);

enum class MaskPosition { BEFORE_PREMISE, AFTER_PREMISE };
enum class PolarityFrame { AT_LEAST, AT_MOST_NEGATED };

struct EntailmentTemplate {
    int id = 0;
    Condition condition = Condition::BELOW;
    std::string pattern; // {PREMISE}, {MASK}, {ADJ} slots
    MaskPosition mask_position = MaskPosition::AFTER_PREMISE;
    PolarityFrame polarity_frame = PolarityFrame::AT_LEAST;
    // Direction of a correct completion relative to the premise, derived from
    // which slot sits inside the at least/at most bound.
    ScaleOrder expected_direction = ScaleOrder::BELOW;
};

std::vector<EntailmentTemplate> load_templates(const std::filesystem::path& tsv_path);

// Restores the printed wording of template 16 (missing copula); its expected
// direction is unchanged.
void apply_paper_exact(std::vector<EntailmentTemplate>& templates);

const EntailmentTemplate& template_by_id(const std::vector<EntailmentTemplate>& templates, int id);

enum class FreqBin { PSEUDO, LOW, MED, HIGH };
std::string to_string(FreqBin b);
FreqBin parse_bin(std::string_view s);

struct PoolEntry {
    std::string adjective;
    FreqBin bin = FreqBin::PSEUDO;
    std::optional<double> log_freq; // natural log relative frequency; absent for PSEUDO
};

struct AdjectivePool {
    std::vector<PoolEntry> entries;
    static AdjectivePool load(const std::filesystem::path& tsv_path);
    void validate() const; // 40 per bin, bins half-open, pseudo without log_freq
};

// Natural-log relative frequency -> bin, per the half-open ranges
// LOW [-18,-14), MED [-14,-10), HIGH [-10,-6).
std::optional<FreqBin> bin_for_log_freq(double log_freq);

struct EligibilityOptions {
    bool exclude_negations = true;
    bool exclude_bottom_for_below = true; // the rank group of bottom_nonneg
    bool exclude_top_for_above = true;    // the rank group of top
    std::set<std::string> extra_excluded_below;
    std::set<std::string> extra_excluded_above;
};

// Premises usable in a condition. Defaults follow the documented rule;
// the realized set is configurable because the source count is ambiguous.
std::vector<const ScalarAdverb*> eligible_premises(const Lexicon& lexicon, Condition condition,
                                                   const EligibilityOptions& options = {});

struct EntailmentItem {
    std::string id; // "t{id}-{premise}-{adjective}"
    int template_id = 0;
    Condition condition = Condition::BELOW;
    std::string premise;
    std::string adjective;
    FreqBin bin = FreqBin::PSEUDO;
    std::string surface; // instantiated sentence with one [MASK]
};

// Deterministic product: condition-ordered templates x eligible premises x
// pool entries. ValidationError naming the template on slot mismatches.
std::vector<EntailmentItem> generate_entailment(const std::vector<EntailmentTemplate>& templates,
                                                const AdjectivePool& pool, const Lexicon& lexicon,
                                                const EligibilityOptions& options = {});

void write_entailment_jsonl(const std::filesystem::path& path,
                            const std::vector<EntailmentItem>& items);
std::vector<EntailmentItem> read_entailment_jsonl(const std::filesystem::path& path);

enum class NliLabel { ENTAILMENT, CONTRADICTION };
std::string to_string(NliLabel l);

struct NliPair {
    std::string premise_sentence;
    std::string hypothesis_sentence;
    NliLabel label = NliLabel::ENTAILMENT;
    // provenance for per-bin reports
    std::string item_id;
    std::string premise_adverb;    // adverb of the premise sentence
    std::string hypothesis_adverb; // adverb of the hypothesis sentence
    std::string adjective;
    FreqBin bin = FreqBin::PSEUDO;
    Condition condition = Condition::BELOW;
};

struct NliBuildStats {
    size_t skipped_no_filler = 0;
    size_t dropped_for_balance = 0;
};

// Fills each mask with a same-category, non-negation adverb: half the items
// (seeded) get a filler that makes the entailment correct (ENTAILMENT), the
// rest an incorrect one (CONTRADICTION). Exactly balanced per category and
// condition; items without a valid filler are skipped and counted.
std::vector<NliPair> to_nli(const std::vector<EntailmentItem>& items,
                            const std::vector<EntailmentTemplate>& templates,
                            const Lexicon& lexicon, uint64_t seed,
                            NliBuildStats* stats = nullptr);

void write_nli_jsonl(const std::filesystem::path& path, const std::vector<NliPair>& pairs);
std::vector<NliPair> read_nli_jsonl(const std::filesystem::path& path);

} // namespace advprobe
