#include "advprobe/scale_ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "advprobe/errors.hpp"
#include "advprobe/metrics.hpp"
#include "advprobe/text.hpp"

namespace advprobe {

std::string to_string(RankMethod m) {
    switch (m) {
        case RankMethod::SIM: return "SIM";
        case RankMethod::DIFF: return "DIFF";
        case RankMethod::ADJDIFF: return "ADJDIFF";
    }
    return "?";
}

RankMethod parse_rank_method(std::string_view s) {
    const std::string lower = text::to_lower(s);
    if (lower == "sim") return RankMethod::SIM;
    if (lower == "diff") return RankMethod::DIFF;
    if (lower == "adjdiff") return RankMethod::ADJDIFF;
    throw ParseError("unknown ranking method: " + std::string(s));
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("cosine of vectors with different sizes");
    double dot = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw UndefinedCosineError("cosine of a zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> load_frame_adjectives(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open frame adjectives file: " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const std::string word = text::trim(line);
        if (word.empty() || word[0] == '#') continue;
        out.push_back(text::to_lower(word));
    }
    if (out.empty()) throw ValidationError("frame adjectives file is empty");
    return out;
}

namespace {

struct FrameText {
    std::string text;
    size_t adv_begin = 0, adv_end = 0;
    size_t adj_begin = 0, adj_end = 0;
};

// "it is {adverb} {adjective} ." with known token offsets.
FrameText modified_frame(const std::string& adverb, const std::string& adjective) {
    FrameText f;
    f.text = "it is " + adverb + " " + adjective + " .";
    f.adv_begin = 6;
    f.adv_end = 6 + adverb.size();
    f.adj_begin = f.adv_end + 1;
    f.adj_end = f.adj_begin + adjective.size();
    return f;
}

// "it is {adjective} ."
FrameText bare_frame(const std::string& adjective) {
    FrameText f;
    f.text = "it is " + adjective + " .";
    f.adj_begin = 6;
    f.adj_end = 6 + adjective.size();
    return f;
}

} // namespace

ScaleRanker::ScaleRanker(const Lexicon& lexicon, const EmbeddingProvider& provider,
                         std::vector<std::string> frames, RankerOptions options)
    : lexicon_(lexicon), provider_(provider), frames_(std::move(frames)), options_(options) {
    if (frames_.empty()) throw ValidationError("scale ranker requires at least one frame adjective");
}

EmbeddingVector ScaleRanker::adverb_context_embedding(const std::string& adverb) const {
    std::vector<double> mean(provider_.hidden_size(), 0.0);
    for (const std::string& adjective : frames_) {
        const FrameText f = modified_frame(adverb, adjective);
        const EmbeddingVector v =
            embed_span(provider_, f.text, f.adv_begin, f.adv_end, options_.gateway);
        for (size_t i = 0; i < mean.size(); ++i) mean[i] += v.values[i];
    }
    for (double& x : mean) x /= static_cast<double>(frames_.size());
    EmbeddingVector out;
    out.values = std::move(mean);
    out.layer = options_.gateway.layer;
    out.pooling = options_.gateway.pooling;
    return out;
}

std::vector<double> ScaleRanker::reference_direction(ScaleCategory category) const {
    const GoldScale& scale = lexicon_.scale(category);
    const std::vector<double> top = adverb_context_embedding(scale.top).values;
    const std::vector<double> end = adverb_context_embedding(scale.bottom_nonneg).values;
    std::vector<double> ref(top.size());
    double norm = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
        ref[i] = top[i] - end[i];
        norm += ref[i] * ref[i];
    }
    if (norm == 0.0) {
        throw DegenerateReferenceError("v_top equals v_end for category " + to_string(category));
    }
    return ref;
}

RankingResult ScaleRanker::rank(RankMethod method, ScaleCategory category) const {
    const GoldScale& scale = lexicon_.scale(category);
    RankingResult result;
    result.category = category;
    result.method = method;

    if (method == RankMethod::SIM) {
        const std::vector<double> top = adverb_context_embedding(scale.top).values;
        for (const ScalarAdverb* a : lexicon_.targets(category)) {
            const std::vector<double> v = adverb_context_embedding(a->surface).values;
            result.scores.push_back({a->surface, cosine(v, top)});
        }
    } else if (method == RankMethod::DIFF) {
        const std::vector<double> ref = reference_direction(category);
        for (const ScalarAdverb* a : lexicon_.targets(category)) {
            const std::vector<double> v = adverb_context_embedding(a->surface).values;
            result.scores.push_back({a->surface, cosine(v, ref)});
        }
    } else {
        const std::vector<double> ref = reference_direction(category);
        for (const ScalarAdverb* a : lexicon_.targets(category)) {
            if (a->surface == scale.top || a->surface == scale.bottom_nonneg) continue;
            double cosine_sum = 0.0;
            std::vector<double> diff_sum(provider_.hidden_size(), 0.0);
            for (const std::string& adjective : frames_) {
                const FrameText with = modified_frame(a->surface, adjective);
                const FrameText without = bare_frame(adjective);
                const EmbeddingVector modified =
                    embed_span(provider_, with.text, with.adj_begin, with.adj_end, options_.gateway);
                const EmbeddingVector bare = embed_span(provider_, without.text, without.adj_begin,
                                                        without.adj_end, options_.gateway);
                std::vector<double> diff(modified.values.size());
                for (size_t i = 0; i < diff.size(); ++i) {
                    diff[i] = modified.values[i] - bare.values[i];
                }
                if (options_.average_diffs_before_cosine) {
                    for (size_t i = 0; i < diff.size(); ++i) diff_sum[i] += diff[i];
                } else {
                    cosine_sum += cosine(diff, ref);
                }
            }
            const double score = options_.average_diffs_before_cosine
                                     ? cosine(diff_sum, ref)
                                     : cosine_sum / static_cast<double>(frames_.size());
            result.scores.push_back({a->surface, score});
        }
    }

    result.predicted_order.reserve(result.scores.size());
    std::vector<std::pair<std::string, double>> sorted = result.scores;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first; // never by gold order: that would leak the answer
    });
    for (const auto& [surface, score] : sorted) result.predicted_order.push_back(surface);
    return result;
}

RankingEvaluation ScaleRanker::evaluate(const RankingResult& result) const {
    const GoldScale& scale = lexicon_.scale(result.category);
    metrics::RankComparison cmp;
    for (const auto& [surface, score] : result.scores) {
        if (result.method != RankMethod::SIM &&
            (surface == scale.top || surface == scale.bottom_nonneg)) {
            continue;
        }
        cmp.gold.push_back(lexicon_.lookup(surface).gold_rank);
        cmp.predicted.push_back(score);
    }
    RankingEvaluation eval;
    eval.n = static_cast<int>(cmp.gold.size());
    eval.pairwise_accuracy = metrics::pairwise_accuracy(cmp);
    eval.spearman_rho = metrics::spearman_rho(cmp);
    eval.kendall_tau_b = metrics::kendall_tau_b(cmp);
    return eval;
}

} // namespace advprobe
