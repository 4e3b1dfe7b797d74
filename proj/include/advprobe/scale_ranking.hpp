#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "advprobe/lexicon.hpp"
#include "advprobe/model_gateway.hpp"

namespace advprobe {

enum class RankMethod { SIM, DIFF, ADJDIFF };
std::string to_string(RankMethod m);
RankMethod parse_rank_method(std::string_view s);

struct RankingResult {
    ScaleCategory category = ScaleCategory::MODALITY;
    RankMethod method = RankMethod::SIM;
    std::vector<std::pair<std::string, double>> scores; // adverb -> score in [-1, 1]
    std::vector<std::string> predicted_order;           // descending score, ties alphabetical
};

struct RankingEvaluation {
    double pairwise_accuracy = 0.0;
    double spearman_rho = 0.0;
    double kendall_tau_b = 0.0;
    int n = 0;
};

struct RankerOptions {
    GatewayOptions gateway;
    // Open alternative to averaging per-frame cosines: average the difference
    // vectors first and take one cosine.
    bool average_diffs_before_cosine = false;
};

std::vector<std::string> load_frame_adjectives(const std::filesystem::path& path);

// The three embedding-space ranking methods over "it is {adverb} {adjective} ."
// frames. SIM scores cosine to the top adverb's embedding; DIFF scores cosine
// to (top - bottom_nonneg); AdjDIFF scores the adverb-induced shift of the
// adjective embedding against the same reference direction.
class ScaleRanker {
public:
    ScaleRanker(const Lexicon& lexicon, const EmbeddingProvider& provider,
                std::vector<std::string> frames, RankerOptions options = {});

    // Mean embedding of the adverb token across all frames; alignment errors
    // propagate (no partial means).
    EmbeddingVector adverb_context_embedding(const std::string& adverb) const;

    RankingResult rank(RankMethod method, ScaleCategory category) const;

    // Gold-order metrics. Reference adverbs (top, bottom_nonneg) are excluded
    // from DIFF and AdjDIFF evaluations, where their scores are degenerate by
    // construction.
    RankingEvaluation evaluate(const RankingResult& result) const;

    const std::vector<std::string>& frames() const { return frames_; }

private:
    std::vector<double> reference_direction(ScaleCategory category) const;

    const Lexicon& lexicon_;
    const EmbeddingProvider& provider_;
    std::vector<std::string> frames_;
    RankerOptions options_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

} // namespace advprobe
