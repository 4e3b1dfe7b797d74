#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advprobe/lexicon.hpp"

namespace advprobe {

// Candidate completions for one mask slot, ordered by descending log
// probability (ties broken on the surface string). Surfaces are normalized:
// tokenizer boundary markers stripped, trimmed, lowercased.
struct RankedCompletions {
    std::string query_id;
    std::vector<std::pair<std::string, double>> candidates;
};

enum class Pooling { MEAN_SUBTOKENS, FIRST_SUBTOKEN };
std::string to_string(Pooling p);
Pooling parse_pooling(std::string_view s);

struct EmbeddingVector {
    std::vector<double> values;
    int layer = -1; // -1 means final hidden layer
    Pooling pooling = Pooling::MEAN_SUBTOKENS;
};

enum class NliLabel3 { ENTAILMENT, NEUTRAL, CONTRADICTION };
std::string to_string(NliLabel3 l);

struct NliVerdict {
    double entailment = 0.0;
    double neutral = 0.0;
    double contradiction = 0.0;
    NliLabel3 argmax() const;
    void validate() const; // probabilities sum to 1 +- 1e-6
};

// Primitive surface of a masked language model. The gateway composes these
// into candidate scoring, full-vocabulary ranks and multi-token handling.
class MaskedLmProvider {
public:
    virtual ~MaskedLmProvider() = default;
    // Vocabulary pieces for one word in a mask slot; empty when the word is
    // not encodable.
    virtual std::vector<std::string> tokenize_word(const std::string& surface) const = 0;
    // Log-probability distribution over single vocabulary pieces at the
    // mask_index-th [MASK] of the text. Need not be sorted.
    virtual std::vector<std::pair<std::string, double>> mask_distribution(
        const std::string& text_with_masks, int mask_index) const = 0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual size_t hidden_size() const = 0;
    // Pooled hidden state for the [begin,end) span. AlignmentError when the
    // span does not line up with the provider's tokens.
    virtual std::vector<double> embed(const std::string& text, size_t begin, size_t end,
                                      int layer, Pooling pooling) const = 0;
};

class NliProvider {
public:
    virtual ~NliProvider() = default;
    virtual NliVerdict classify(const std::string& premise, const std::string& hypothesis) const = 0;
};

struct ScoredCandidate {
    double log_prob = 0.0;
    bool multi_token = false;
};

struct GatewayOptions {
    int layer = -1;
    Pooling pooling = Pooling::MEAN_SUBTOKENS;
};

struct MaskProbeResult {
    int target_rank = 0; // 1-based
    double target_log_prob = 0.0;
    double not_log_prob = 0.0;
    bool target_multi_token = false;
    RankedCompletions top;
};

// Normalizing front end over a MaskedLmProvider.
class MaskGateway {
public:
    explicit MaskGateway(std::shared_ptr<MaskedLmProvider> provider, GatewayOptions options = {});

    // Top-k single-token candidates with log probabilities. InputError unless
    // the text holds exactly one mask. k = 0 yields an empty list.
    RankedCompletions fill_mask_topk(const std::string& text_with_mask, int k) const;

    // Scores every candidate from one full-vocabulary query; multi-token
    // candidates are scored by summed conditional log probabilities with
    // left-to-right incremental unmasking and flagged multi_token.
    std::map<std::string, ScoredCandidate> score_candidates(
        const std::string& text_with_mask, const std::vector<std::string>& candidates) const;

    // One distribution fetch answering the MLM probe: the target's
    // full-vocabulary rank, its score, the score of `not`, and the top-k list.
    // Multi-token targets rank as 1 + count of single tokens scoring above
    // their length-normalized score.
    MaskProbeResult probe(const std::string& text_with_mask, const std::string& target,
                          int top_k = 10) const;

    const MaskedLmProvider& provider() const { return *provider_; }

private:
    std::vector<std::pair<std::string, double>> normalized_distribution(
        const std::string& text_with_mask) const;
    ScoredCandidate score_multi(const std::string& text_with_mask,
                                const std::vector<std::string>& pieces) const;

    std::shared_ptr<MaskedLmProvider> provider_;
    GatewayOptions options_;
};

// Gateway embed_span: applies configured layer/pooling and validates shape.
EmbeddingVector embed_span(const EmbeddingProvider& provider, const std::string& text,
                           size_t begin, size_t end, const GatewayOptions& options = {});

// ---- Mock and synthetic backends -----------------------------------------

// Masked LM with per-query scripted distributions (exact probabilities in
// (0,1], normalized at construction). Queries without a script fall back to
// the default distribution when one is set.
class ScriptedMaskedLm : public MaskedLmProvider {
public:
    using Distribution = std::vector<std::pair<std::string, double>>;

    ScriptedMaskedLm() = default;
    void set_default(Distribution d);
    void add(const std::string& text_with_mask, Distribution d);
    void set_pieces(const std::string& word, std::vector<std::string> pieces);

    std::vector<std::string> tokenize_word(const std::string& surface) const override;
    std::vector<std::pair<std::string, double>> mask_distribution(
        const std::string& text_with_masks, int mask_index) const override;

private:
    std::map<std::string, Distribution> by_text_;
    std::optional<Distribution> default_;
    std::map<std::string, std::vector<std::string>> pieces_;
};

enum class MockBehavior { TARGET_FIRST, NOT_FIRST, UNIFORM, FREQUENCY };
MockBehavior parse_mock_behavior(std::string_view s);

// Builds a scripted mock over (text -> target) pairs: TARGET_FIRST puts the
// target on top, NOT_FIRST puts `not` on top, UNIFORM spreads mass equally,
// FREQUENCY weights lexicon adverbs by their reddit frequencies.
std::shared_ptr<ScriptedMaskedLm> make_mock_masked_lm(
    const std::vector<std::pair<std::string, std::string>>& text_targets, const Lexicon& lexicon,
    MockBehavior behavior);

// Deterministic embedding space with the gold order planted along a fixed
// direction: adverb vectors rotate toward the top-of-scale axis as the gold
// rank grows, and an adverb-modified adjective equals the bare adjective
// vector plus the adverb vector. All three ranking methods recover the gold
// ordering exactly on this provider.
class SyntheticEmbeddingProvider : public EmbeddingProvider {
public:
    SyntheticEmbeddingProvider(const Lexicon& lexicon, size_t dims = 16, double max_angle = 1.0);
    size_t hidden_size() const override { return dims_; }
    std::vector<double> embed(const std::string& text, size_t begin, size_t end, int layer,
                              Pooling pooling) const override;
    // Shift added to every returned vector; used by the invariance tests.
    void set_offset(std::vector<double> offset);

    std::vector<double> adverb_vector(const std::string& adverb) const;
    std::vector<double> adjective_vector(const std::string& adjective) const;

private:
    const Lexicon& lexicon_;
    size_t dims_;
    double max_angle_;
    std::vector<double> offset_;
};

// NLI classifier that answers from the gold scales (parses the generated
// "It is {adverb} {adjective}." frames).
class GoldOracleNli : public NliProvider {
public:
    explicit GoldOracleNli(const Lexicon& lexicon) : lexicon_(lexicon) {}
    NliVerdict classify(const std::string& premise, const std::string& hypothesis) const override;

private:
    const Lexicon& lexicon_;
};

// Near-uniform verdicts with seeded jitter so three-way ties resolve
// uniformly.
class UniformNli : public NliProvider {
public:
    explicit UniformNli(uint64_t seed) : seed_(seed) {}
    NliVerdict classify(const std::string& premise, const std::string& hypothesis) const override;

private:
    uint64_t seed_;
};

// ---- HTTP-backed models ----------------------------------------------------
//
// Speaks a small JSON protocol (documented in the README) so that real
// transformer checkpoints can be served from any process:
//   POST /tokenize   {"word": w}                      -> {"pieces": [..]}
//   POST /fill_mask  {"text": t, "mask_index": i}     -> {"candidates": [[piece, logprob], ..]}
//   POST /embed      {"text": t, "span": [b,e],
//                     "layer": l, "pooling": p}       -> {"values": [..]}
//   POST /nli        {"premise": p, "hypothesis": h}  -> {"entailment": e, "neutral": n,
//                                                         "contradiction": c}
class HttpModelProvider : public MaskedLmProvider,
                          public EmbeddingProvider,
                          public NliProvider {
public:
    explicit HttpModelProvider(std::string base_url, int timeout_seconds = 120);

    std::vector<std::string> tokenize_word(const std::string& surface) const override;
    std::vector<std::pair<std::string, double>> mask_distribution(
        const std::string& text_with_masks, int mask_index) const override;
    size_t hidden_size() const override;
    std::vector<double> embed(const std::string& text, size_t begin, size_t end, int layer,
                              Pooling pooling) const override;
    NliVerdict classify(const std::string& premise, const std::string& hypothesis) const override;

private:
    std::string post(const std::string& path, const std::string& body) const;
    std::string base_url_;
    int timeout_seconds_;
    mutable size_t cached_hidden_size_ = 0;
};

} // namespace advprobe
