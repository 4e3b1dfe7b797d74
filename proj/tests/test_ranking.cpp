#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "advprobe/errors.hpp"
#include "advprobe/scale_ranking.hpp"
#include "support/paths.hpp"

using namespace advprobe;

namespace {

const Lexicon& lex() {
    static Lexicon lexicon = testsupport::load_lexicon();
    return lexicon;
}

std::vector<std::string> frames() {
    return load_frame_adjectives(testsupport::data_dir() / "frame_adjectives.txt");
}

// Provider returning a constant vector for every span.
class ConstantProvider : public EmbeddingProvider {
public:
    explicit ConstantProvider(std::vector<double> v) : v_(std::move(v)) {}
    size_t hidden_size() const override { return v_.size(); }
    std::vector<double> embed(const std::string&, size_t, size_t, int, Pooling) const override {
        return v_;
    }

private:
    std::vector<double> v_;
};

} // namespace

TEST_CASE("frame adjectives ship as the 40-item list") {
    const auto f = frames();
    CHECK(f.size() == 40);
    CHECK(f.front() == "able");
    CHECK(f.back() == "young");
}

TEST_CASE("adverb context embedding is the mean over all frames") {
    const SyntheticEmbeddingProvider provider(lex(), 16);
    const ScaleRanker ranker(lex(), provider, frames());
    // the synthetic adverb vector is frame-independent, so the mean equals it
    const EmbeddingVector v = ranker.adverb_context_embedding("very");
    const std::vector<double> direct = provider.adverb_vector("very");
    for (size_t i = 0; i < v.values.size(); ++i) {
        CHECK(v.values[i] == doctest::Approx(direct[i]).epsilon(1e-12));
    }
}

TEST_CASE("embedding failures do not produce silent partial means") {
    // Throws on one specific frame adjective.
    class FlakyProvider : public SyntheticEmbeddingProvider {
    public:
        using SyntheticEmbeddingProvider::SyntheticEmbeddingProvider;
        std::vector<double> embed(const std::string& text, size_t b, size_t e, int layer,
                                  Pooling pooling) const override {
            if (text.find(" federal ") != std::string::npos) {
                throw AlignmentError("broken frame");
            }
            return SyntheticEmbeddingProvider::embed(text, b, e, layer, pooling);
        }
    };
    const FlakyProvider provider(lex(), 16);
    const ScaleRanker ranker(lex(), provider, frames());
    CHECK_THROWS_AS((void)ranker.adverb_context_embedding("very"), AlignmentError);
}

TEST_CASE("planted embeddings are recovered perfectly by all three methods") {
    const SyntheticEmbeddingProvider provider(lex(), 16);
    const ScaleRanker ranker(lex(), provider, frames());
    for (RankMethod method : {RankMethod::SIM, RankMethod::DIFF, RankMethod::ADJDIFF}) {
        for (ScaleCategory category : kAllCategories) {
            CAPTURE(to_string(method));
            CAPTURE(to_string(category));
            const RankingResult result = ranker.rank(method, category);
            for (const auto& [adverb, score] : result.scores) {
                CHECK(score >= -1.0);
                CHECK(score <= 1.0);
            }
            const RankingEvaluation eval = ranker.evaluate(result);
            CHECK(eval.spearman_rho == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(eval.pairwise_accuracy == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(eval.kendall_tau_b == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("SIM scores the top adverb at exactly one") {
    const SyntheticEmbeddingProvider provider(lex(), 16);
    const ScaleRanker ranker(lex(), provider, frames());
    const RankingResult result = ranker.rank(RankMethod::SIM, ScaleCategory::DEGREE);
    const auto top = std::find_if(result.scores.begin(), result.scores.end(),
                                  [](const auto& s) { return s.first == "completely"; });
    REQUIRE(top != result.scores.end());
    CHECK(top->second == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.predicted_order.front() == "completely");
}

TEST_CASE("SIM scores all eight targets, DIFF and ADJDIFF exclude references from evaluation") {
    const SyntheticEmbeddingProvider provider(lex(), 16);
    const ScaleRanker ranker(lex(), provider, frames());
    CHECK(ranker.rank(RankMethod::SIM, ScaleCategory::FREQUENCY).scores.size() == 8);
    CHECK(ranker.rank(RankMethod::DIFF, ScaleCategory::FREQUENCY).scores.size() == 8);
    CHECK(ranker.rank(RankMethod::ADJDIFF, ScaleCategory::FREQUENCY).scores.size() == 6);
    CHECK(ranker.evaluate(ranker.rank(RankMethod::DIFF, ScaleCategory::FREQUENCY)).n == 6);
    CHECK(ranker.evaluate(ranker.rank(RankMethod::SIM, ScaleCategory::FREQUENCY)).n == 8);
}

TEST_CASE("averaging difference vectors before the cosine also recovers the planted order") {
    const SyntheticEmbeddingProvider provider(lex(), 16);
    RankerOptions options;
    options.average_diffs_before_cosine = true;
    const ScaleRanker ranker(lex(), provider, frames(), options);
    const RankingEvaluation eval =
        ranker.evaluate(ranker.rank(RankMethod::ADJDIFF, ScaleCategory::MODALITY));
    CHECK(eval.spearman_rho == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate geometry raises the documented errors") {
    const ConstantProvider zeros(std::vector<double>(8, 0.0));
    const ScaleRanker zero_ranker(lex(), zeros, {"good"});
    CHECK_THROWS_AS((void)zero_ranker.rank(RankMethod::SIM, ScaleCategory::DEGREE),
                    UndefinedCosineError);

    std::vector<double> ones(8, 1.0);
    const ConstantProvider constant(ones);
    const ScaleRanker const_ranker(lex(), constant, {"good"});
    // v_top == v_end collapses the reference direction
    CHECK_THROWS_AS((void)const_ranker.rank(RankMethod::DIFF, ScaleCategory::DEGREE),
                    DegenerateReferenceError);
    // and the adjective difference vector is zero
    CHECK_THROWS_AS((void)const_ranker.rank(RankMethod::ADJDIFF, ScaleCategory::DEGREE),
                    DegenerateReferenceError);
}

TEST_CASE("AdjDIFF surfaces an undefined cosine when modification does nothing") {
    // Adjective embeddings ignore the adverb: modified == bare, diff == 0.
    class InertProvider : public EmbeddingProvider {
    public:
        size_t hidden_size() const override { return 4; }
        std::vector<double> embed(const std::string& text, size_t begin, size_t end, int,
                                  Pooling) const override {
            const std::string span = text.substr(begin, end - begin);
            const Lexicon& lexicon = lex();
            if (const ScalarAdverb* a = lexicon.find(span); a && a->is_target) {
                const double t = a->gold_rank + 1.0;
                return {t, 1.0, 0.0, 0.0};
            }
            return {0.0, 0.0, 1.0, 0.0}; // every adjective, modified or not
        }
    };
    const InertProvider provider;
    const ScaleRanker ranker(lex(), provider, {"good"});
    CHECK_THROWS_AS((void)ranker.rank(RankMethod::ADJDIFF, ScaleCategory::DEGREE),
                    UndefinedCosineError);
}

TEST_CASE("argmax survives shifts orthogonal to the reference direction") {
    SyntheticEmbeddingProvider provider(lex(), 16);
    const ScaleRanker base_ranker(lex(), provider, frames());
    const std::string base_diff_top =
        base_ranker.rank(RankMethod::DIFF, ScaleCategory::DEGREE).predicted_order.front();
    const std::string base_adj_top =
        base_ranker.rank(RankMethod::ADJDIFF, ScaleCategory::DEGREE).predicted_order.front();

    // The scale plane is spanned by dims 0 and 1; dim 5 is orthogonal to it.
    std::vector<double> offset(16, 0.0);
    offset[5] = 0.7;
    provider.set_offset(offset);
    const ScaleRanker shifted(lex(), provider, frames());
    CHECK(shifted.rank(RankMethod::DIFF, ScaleCategory::DEGREE).predicted_order.front() ==
          base_diff_top);
    CHECK(shifted.rank(RankMethod::ADJDIFF, ScaleCategory::DEGREE).predicted_order.front() ==
          base_adj_top);
}

TEST_CASE("predicted order breaks score ties alphabetically") {
    const SyntheticEmbeddingProvider provider(lex(), 16);
    const ScaleRanker ranker(lex(), provider, frames());
    RankingResult r = ranker.rank(RankMethod::SIM, ScaleCategory::MODALITY);
    // the tied bottom trio shares one planted vector, hence one score
    std::map<std::string, double> scores(r.scores.begin(), r.scores.end());
    CHECK(scores["maybe"] == scores["perhaps"]);
    CHECK(scores["perhaps"] == scores["possibly"]);
    const auto maybe_pos = std::find(r.predicted_order.begin(), r.predicted_order.end(), "maybe");
    REQUIRE(maybe_pos != r.predicted_order.end());
    CHECK(*(maybe_pos + 1) == "perhaps");
    CHECK(*(maybe_pos + 2) == "possibly");
}
