#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace advprobe {

enum class ScaleCategory { MODALITY, FREQUENCY, DEGREE };

constexpr std::array<ScaleCategory, 3> kAllCategories = {
    ScaleCategory::MODALITY, ScaleCategory::FREQUENCY, ScaleCategory::DEGREE};

std::string to_string(ScaleCategory c);
ScaleCategory parse_category(std::string_view s);

// Result of ordering two adverbs on the gold scales. INCOMPARABLE when the
// categories differ (or either word is off-scale); entailment is only defined
// within one scale.
enum class ScaleOrder { BELOW, ABOVE, TIED, INCOMPARABLE };
std::string to_string(ScaleOrder o);

struct ScalarAdverb {
    std::string surface;                    // lowercase
    std::optional<ScaleCategory> category;  // empty for off-scale entries (not, already, seriously)
    int gold_rank = -1;                     // group rank within category; tied items share a rank
    bool is_negation = false;
    bool is_target = false;
    double wordfreq_rel = 0.0;
    double reddit_rel = 0.0;
};

struct GoldScale {
    ScaleCategory category;
    std::vector<std::vector<std::string>> ordering; // rank groups, ascending scalar position
    std::string top;                                // highest adverb
    std::string bottom_nonneg;                      // representative of lowest non-negation group
};

// 24 target adverbs (3 categories of 8, with ties), the benchmark word `not`,
// and the off-scale frequency-reference entries. Immutable after load.
class Lexicon {
public:
    static Lexicon load(const std::filesystem::path& tsv_path);
    void save(const std::filesystem::path& tsv_path) const;

    // Case-insensitive, whitespace-trimmed lookup.
    const ScalarAdverb* find(std::string_view surface) const;
    const ScalarAdverb& lookup(std::string_view surface) const; // LookupError if absent

    const std::vector<ScalarAdverb>& entries() const { return entries_; }
    std::vector<const ScalarAdverb*> targets() const;
    std::vector<const ScalarAdverb*> targets(ScaleCategory c) const;

    const GoldScale& scale(ScaleCategory c) const;

    // BELOW/ABOVE by gold rank, TIED within a rank group, INCOMPARABLE across
    // categories. LookupError for unknown adverbs.
    ScaleOrder compare(std::string_view a, std::string_view b) const;

    bool is_negation_answer(std::string_view surface) const; // {not, hardly, never}

    // The MODALITY bottom rank group is tied; the DIFF reference uses one
    // representative (default: maybe, the first listed).
    void set_modality_bottom(std::string_view surface);

    int max_rank(ScaleCategory c) const;

private:
    Lexicon() = default;
    void validate() const;
    void build_scales();

    std::vector<ScalarAdverb> entries_;
    std::array<GoldScale, 3> scales_{};
};

} // namespace advprobe
