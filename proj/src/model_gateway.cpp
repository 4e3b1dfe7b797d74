#include "advprobe/model_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "advprobe/errors.hpp"
#include "advprobe/rng.hpp"
#include "advprobe/sha256.hpp"
#include "advprobe/text.hpp"

namespace advprobe {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int count_masks(const std::string& s) { return text::count_occurrences(s, "[MASK]"); }

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

std::string to_string(Pooling p) {
    return p == Pooling::MEAN_SUBTOKENS ? "MEAN_SUBTOKENS" : "FIRST_SUBTOKEN";
}

Pooling parse_pooling(std::string_view s) {
    if (s == "MEAN_SUBTOKENS" || s == "mean") return Pooling::MEAN_SUBTOKENS;
    if (s == "FIRST_SUBTOKEN" || s == "first") return Pooling::FIRST_SUBTOKEN;
    throw ParseError("unknown pooling: " + std::string(s));
}

std::string to_string(NliLabel3 l) {
    switch (l) {
        case NliLabel3::ENTAILMENT: return "ENTAILMENT";
        case NliLabel3::NEUTRAL: return "NEUTRAL";
        case NliLabel3::CONTRADICTION: return "CONTRADICTION";
    }
    return "?";
}

NliLabel3 NliVerdict::argmax() const {
    if (entailment >= neutral && entailment >= contradiction) return NliLabel3::ENTAILMENT;
    if (neutral >= contradiction) return NliLabel3::NEUTRAL;
    return NliLabel3::CONTRADICTION;
}

void NliVerdict::validate() const {
    const double sum = entailment + neutral + contradiction;
    if (std::abs(sum - 1.0) > 1e-6) {
        throw ValidationError("NLI probabilities sum to " + text::format_double(sum, 10) +
                              ", expected 1");
    }
}

MaskGateway::MaskGateway(std::shared_ptr<MaskedLmProvider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(options) {
    if (!provider_) throw GatewayError("mask gateway requires a provider");
}

std::vector<std::pair<std::string, double>> MaskGateway::normalized_distribution(
    const std::string& text_with_mask) const {
    const int masks = count_masks(text_with_mask);
    if (masks == 0) throw InputError("text contains no [MASK] placeholder");
    if (masks > 1) throw InputError("text contains more than one [MASK] placeholder");
    std::map<std::string, double> merged;
    for (const auto& [piece, lp] : provider_->mask_distribution(text_with_mask, 0)) {
        const std::string surface = text::normalize_surface(piece);
        if (surface.empty()) continue;
        auto [it, inserted] = merged.emplace(surface, lp);
        if (!inserted) it->second = log_add(it->second, lp);
    }
    std::vector<std::pair<std::string, double>> out(merged.begin(), merged.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

RankedCompletions MaskGateway::fill_mask_topk(const std::string& text_with_mask, int k) const {
    const int masks = count_masks(text_with_mask);
    if (masks == 0) throw InputError("text contains no [MASK] placeholder");
    if (masks > 1) throw InputError("text contains more than one [MASK] placeholder");
    RankedCompletions out;
    out.query_id = sha256_hex(text_with_mask).substr(0, 16);
    if (k <= 0) return out;
    auto dist = normalized_distribution(text_with_mask);
    if (static_cast<int>(dist.size()) > k) dist.resize(static_cast<size_t>(k));
    out.candidates = std::move(dist);
    return out;
}

ScoredCandidate MaskGateway::score_multi(const std::string& text_with_mask,
                                         const std::vector<std::string>& pieces) const {
    // Left-to-right incremental unmasking: piece i is scored at the first
    // remaining mask with pieces 0..i-1 substituted in as text.
    const size_t slot = text_with_mask.find("[MASK]");
    const std::string prefix = text_with_mask.substr(0, slot);
    const std::string suffix = text_with_mask.substr(slot + 6);
    double total = 0.0;
    for (size_t i = 0; i < pieces.size(); ++i) {
        std::string filled;
        for (size_t j = 0; j < i; ++j) {
            if (pieces[j].rfind("##", 0) == 0) filled += pieces[j].substr(2);
            else {
                if (!filled.empty()) filled += ' ';
                filled += pieces[j];
            }
        }
        std::string masks;
        for (size_t j = i; j < pieces.size(); ++j) {
            if (!masks.empty()) masks += ' ';
            masks += "[MASK]";
        }
        std::string query = prefix;
        if (!filled.empty()) query += filled + (pieces[i].rfind("##", 0) == 0 ? "" : " ");
        query += masks + suffix;
        const std::string want = text::normalize_surface(pieces[i]);
        double lp = kNegInf;
        for (const auto& [piece, p] : provider_->mask_distribution(query, 0)) {
            if (text::normalize_surface(piece) == want) lp = log_add(lp, p);
        }
        total += lp;
        if (total == kNegInf) break;
    }
    return {total, true};
}

std::map<std::string, ScoredCandidate> MaskGateway::score_candidates(
    const std::string& text_with_mask, const std::vector<std::string>& candidates) const {
    if (candidates.empty()) throw InputError("score_candidates requires at least one candidate");
    const auto dist = normalized_distribution(text_with_mask);
    std::map<std::string, double> by_surface(dist.begin(), dist.end());
    std::map<std::string, ScoredCandidate> out;
    for (const std::string& raw : candidates) {
        const std::string cand = text::normalize_surface(raw);
        const std::vector<std::string> pieces = provider_->tokenize_word(cand);
        if (pieces.empty()) {
            std::cerr << "warning: candidate '" << cand << "' is not encodable; scored -inf\n";
            out[cand] = {kNegInf, false};
            continue;
        }
        if (pieces.size() == 1) {
            auto it = by_surface.find(text::normalize_surface(pieces[0]));
            out[cand] = {it == by_surface.end() ? kNegInf : it->second, false};
        } else {
            out[cand] = score_multi(text_with_mask, pieces);
        }
    }
    return out;
}

MaskProbeResult MaskGateway::probe(const std::string& text_with_mask, const std::string& target,
                                   int top_k) const {
    const auto dist = normalized_distribution(text_with_mask);
    MaskProbeResult res;
    res.top.query_id = sha256_hex(text_with_mask).substr(0, 16);
    res.top.candidates.assign(dist.begin(),
                              dist.begin() + std::min<size_t>(dist.size(),
                                                              static_cast<size_t>(std::max(top_k, 0))));

    const std::string want = text::normalize_surface(target);
    const std::vector<std::string> pieces = provider_->tokenize_word(want);
    if (pieces.size() <= 1) {
        res.target_log_prob = kNegInf;
        res.target_rank = static_cast<int>(dist.size()) + 1;
        for (size_t i = 0; i < dist.size(); ++i) {
            if (dist[i].first == want) {
                res.target_rank = static_cast<int>(i) + 1;
                res.target_log_prob = dist[i].second;
                break;
            }
        }
    } else {
        const ScoredCandidate sc = score_multi(text_with_mask, pieces);
        const double normalized =
            sc.log_prob == kNegInf ? kNegInf
                                   : sc.log_prob / static_cast<double>(pieces.size());
        int above = 0;
        for (const auto& [surface, lp] : dist) {
            if (lp > normalized) ++above;
        }
        res.target_rank = above + 1;
        res.target_log_prob = normalized;
        res.target_multi_token = true;
    }

    res.not_log_prob = kNegInf;
    for (const auto& [surface, lp] : dist) {
        if (surface == "not") {
            res.not_log_prob = lp;
            break;
        }
    }
    return res;
}

EmbeddingVector embed_span(const EmbeddingProvider& provider, const std::string& text,
                           size_t begin, size_t end, const GatewayOptions& options) {
    if (begin >= end || end > text.size()) {
        throw AlignmentError("span [" + std::to_string(begin) + "," + std::to_string(end) +
                             ") is outside the text");
    }
    EmbeddingVector v;
    v.values = provider.embed(text, begin, end, options.layer, options.pooling);
    v.layer = options.layer;
    v.pooling = options.pooling;
    if (v.values.size() != provider.hidden_size()) {
        throw GatewayError("provider returned " + std::to_string(v.values.size()) +
                           " dims, expected " + std::to_string(provider.hidden_size()));
    }
    for (double x : v.values) {
        if (!std::isfinite(x)) throw GatewayError("non-finite embedding component");
    }
    return v;
}

// ---- ScriptedMaskedLm ------------------------------------------------------

namespace {

ScriptedMaskedLm::Distribution normalize_probs(ScriptedMaskedLm::Distribution d) {
    double sum = 0.0;
    for (const auto& [w, p] : d) {
        if (p <= 0.0) throw ValidationError("scripted probability must be positive for '" + w + "'");
        sum += p;
    }
    for (auto& [w, p] : d) p = std::log(p / sum);
    return d;
}

} // namespace

void ScriptedMaskedLm::set_default(Distribution d) { default_ = normalize_probs(std::move(d)); }

void ScriptedMaskedLm::add(const std::string& text_with_mask, Distribution d) {
    by_text_[text_with_mask] = normalize_probs(std::move(d));
}

void ScriptedMaskedLm::set_pieces(const std::string& word, std::vector<std::string> pieces) {
    pieces_[text::to_lower(word)] = std::move(pieces);
}

std::vector<std::string> ScriptedMaskedLm::tokenize_word(const std::string& surface) const {
    auto it = pieces_.find(text::to_lower(surface));
    if (it != pieces_.end()) return it->second;
    return {surface};
}

std::vector<std::pair<std::string, double>> ScriptedMaskedLm::mask_distribution(
    const std::string& text_with_masks, int mask_index) const {
    if (mask_index < 0 || mask_index >= count_masks(text_with_masks)) {
        throw GatewayError("mask_index out of range");
    }
    auto it = by_text_.find(text_with_masks);
    if (it != by_text_.end()) return it->second;
    if (default_) return *default_;
    throw GatewayError("no scripted distribution for query: " + text_with_masks);
}

MockBehavior parse_mock_behavior(std::string_view s) {
    if (s == "target-first") return MockBehavior::TARGET_FIRST;
    if (s == "not-first") return MockBehavior::NOT_FIRST;
    if (s == "uniform") return MockBehavior::UNIFORM;
    if (s == "frequency") return MockBehavior::FREQUENCY;
    throw ParseError("unknown mock behavior: " + std::string(s));
}

std::shared_ptr<ScriptedMaskedLm> make_mock_masked_lm(
    const std::vector<std::pair<std::string, std::string>>& text_targets, const Lexicon& lexicon,
    MockBehavior behavior) {
    auto mock = std::make_shared<ScriptedMaskedLm>();
    const std::vector<std::string> fillers = {"the", "a", "one"};

    for (const auto& [text_str, target] : text_targets) {
        ScriptedMaskedLm::Distribution d;
        double adverb_mass = 0.0;
        for (const ScalarAdverb& a : lexicon.entries()) adverb_mass += a.reddit_rel;
        switch (behavior) {
            case MockBehavior::TARGET_FIRST:
            case MockBehavior::NOT_FIRST: {
                const bool target_first = behavior == MockBehavior::TARGET_FIRST;
                for (const ScalarAdverb& a : lexicon.entries()) {
                    if (a.surface == target || a.surface == "not") continue;
                    d.push_back({a.surface, 0.30 * a.reddit_rel / adverb_mass});
                }
                d.push_back({target, target_first ? 0.45 : 0.15});
                d.push_back({"not", target_first ? 0.15 : 0.45});
                for (const std::string& f : fillers) d.push_back({f, 0.10 / 3.0});
                break;
            }
            case MockBehavior::UNIFORM: {
                for (const ScalarAdverb& a : lexicon.entries()) d.push_back({a.surface, 1.0});
                for (const std::string& f : fillers) d.push_back({f, 1.0});
                break;
            }
            case MockBehavior::FREQUENCY: {
                for (const ScalarAdverb& a : lexicon.entries()) d.push_back({a.surface, a.reddit_rel});
                for (const std::string& f : fillers) d.push_back({f, 0.001});
                break;
            }
        }
        mock->add(text_str, std::move(d));
    }
    return mock;
}

// ---- SyntheticEmbeddingProvider ---------------------------------------------

SyntheticEmbeddingProvider::SyntheticEmbeddingProvider(const Lexicon& lexicon, size_t dims,
                                                       double max_angle)
    : lexicon_(lexicon), dims_(dims), max_angle_(max_angle) {
    if (dims_ < 3) throw ValidationError("synthetic provider needs at least 3 dimensions");
}

void SyntheticEmbeddingProvider::set_offset(std::vector<double> offset) {
    if (offset.size() != dims_) throw ValidationError("offset dimensionality mismatch");
    offset_ = std::move(offset);
}

std::vector<double> SyntheticEmbeddingProvider::adverb_vector(const std::string& adverb) const {
    std::vector<double> v(dims_, 0.0);
    const ScalarAdverb* a = lexicon_.find(adverb);
    if (a && a->is_target && a->category) {
        const double span = static_cast<double>(lexicon_.max_rank(*a->category));
        const double t = span > 0 ? static_cast<double>(a->gold_rank) / span : 1.0;
        const double angle = max_angle_ * (1.0 - t);
        v[0] = std::cos(angle);
        v[1] = std::sin(angle);
    } else {
        // Off-scale words land on a hash direction outside the scale plane.
        uint64_t h = fnv1a(adverb);
        v[2 + h % (dims_ - 2)] = 1.0;
    }
    return v;
}

std::vector<double> SyntheticEmbeddingProvider::adjective_vector(const std::string& adjective) const {
    std::vector<double> v(dims_, 0.0);
    uint64_t state = fnv1a(adjective) | 1u;
    for (size_t i = 2; i < dims_; ++i) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        v[i] = (static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5);
    }
    return v;
}

std::vector<double> SyntheticEmbeddingProvider::embed(const std::string& text, size_t begin,
                                                      size_t end, int /*layer*/,
                                                      Pooling /*pooling*/) const {
    if (begin >= end || end > text.size()) {
        throw AlignmentError("span [" + std::to_string(begin) + "," + std::to_string(end) +
                             ") is outside the text");
    }
    // Expected frames: "it is {adverb} {adjective} ." and "it is {adjective} .".
    const std::vector<std::string> tokens = text::split_ws(text);
    const std::string span = text::to_lower(text.substr(begin, end - begin));

    std::string adverb;
    std::string adjective;
    if (tokens.size() == 5 && tokens[4] == ".") {
        adverb = text::to_lower(tokens[2]);
        adjective = text::to_lower(tokens[3]);
    } else if (tokens.size() == 4 && tokens[3] == ".") {
        adjective = text::to_lower(tokens[2]);
    } else {
        throw AlignmentError("synthetic provider cannot interpret: " + text);
    }

    std::vector<double> v;
    if (!adverb.empty() && span == adverb) {
        v = adverb_vector(adverb);
    } else if (span == adjective) {
        v = adjective_vector(adjective);
        if (!adverb.empty()) {
            const std::vector<double> shift = adverb_vector(adverb);
            for (size_t i = 0; i < dims_; ++i) v[i] += shift[i];
        }
    } else {
        throw AlignmentError("span '" + span + "' does not cover a content token of: " + text);
    }
    if (!offset_.empty()) {
        for (size_t i = 0; i < dims_; ++i) v[i] += offset_[i];
    }
    return v;
}

// ---- NLI mocks --------------------------------------------------------------

namespace {

std::string frame_adverb(const std::string& sentence) {
    const std::vector<std::string> tokens = text::split_ws(sentence);
    if (tokens.size() < 4 || text::to_lower(tokens[0]) != "it" || tokens[1] != "is") return "";
    return text::to_lower(tokens[2]);
}

} // namespace

NliVerdict GoldOracleNli::classify(const std::string& premise, const std::string& hypothesis) const {
    const std::string p = frame_adverb(premise);
    const std::string h = frame_adverb(hypothesis);
    NliVerdict v{0.20, 0.60, 0.20};
    if (!p.empty() && !h.empty() && lexicon_.find(p) && lexicon_.find(h)) {
        const ScaleOrder order = lexicon_.compare(h, p);
        if (order == ScaleOrder::BELOW || order == ScaleOrder::TIED) {
            v = {0.90, 0.06, 0.04};
        } else {
            v = {0.04, 0.06, 0.90};
        }
    }
    v.validate();
    return v;
}

NliVerdict UniformNli::classify(const std::string& premise, const std::string& hypothesis) const {
    Rng rng(seed_ ^ fnv1a(premise + "\x1f" + hypothesis));
    double e = 1.0 + 1e-9 * rng.unit();
    double n = 1.0 + 1e-9 * rng.unit();
    double c = 1.0 + 1e-9 * rng.unit();
    const double sum = e + n + c;
    NliVerdict v{e / sum, n / sum, c / sum};
    v.validate();
    return v;
}

// ---- HttpModelProvider -------------------------------------------------------

HttpModelProvider::HttpModelProvider(std::string base_url, int timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {}

std::string HttpModelProvider::post(const std::string& path, const std::string& body) const {
    httplib::Client client(base_url_);
    client.set_read_timeout(timeout_seconds_, 0);
    client.set_connection_timeout(timeout_seconds_, 0);
    auto res = client.Post(path, body, "application/json");
    if (!res) throw GatewayError("model server unreachable at " + base_url_ + path);
    if (res->status != 200) {
        throw GatewayError("model server returned HTTP " + std::to_string(res->status) + " for " +
                           path);
    }
    return res->body;
}

std::vector<std::string> HttpModelProvider::tokenize_word(const std::string& surface) const {
    nlohmann::json req{{"word", surface}};
    const nlohmann::json resp = nlohmann::json::parse(post("/tokenize", req.dump()));
    return resp.at("pieces").get<std::vector<std::string>>();
}

std::vector<std::pair<std::string, double>> HttpModelProvider::mask_distribution(
    const std::string& text_with_masks, int mask_index) const {
    nlohmann::json req{{"text", text_with_masks}, {"mask_index", mask_index}};
    const nlohmann::json resp = nlohmann::json::parse(post("/fill_mask", req.dump()));
    std::vector<std::pair<std::string, double>> out;
    for (const auto& entry : resp.at("candidates")) {
        out.push_back({entry.at(0).get<std::string>(), entry.at(1).get<double>()});
    }
    return out;
}

size_t HttpModelProvider::hidden_size() const {
    if (cached_hidden_size_ == 0) {
        const nlohmann::json resp = nlohmann::json::parse(post("/meta", "{}"));
        cached_hidden_size_ = resp.at("hidden_size").get<size_t>();
    }
    return cached_hidden_size_;
}

std::vector<double> HttpModelProvider::embed(const std::string& text, size_t begin, size_t end,
                                             int layer, Pooling pooling) const {
    nlohmann::json req{{"text", text},
                       {"span", {begin, end}},
                       {"layer", layer},
                       {"pooling", to_string(pooling)}};
    const nlohmann::json resp = nlohmann::json::parse(post("/embed", req.dump()));
    auto values = resp.at("values").get<std::vector<double>>();
    if (cached_hidden_size_ == 0) cached_hidden_size_ = values.size();
    return values;
}

NliVerdict HttpModelProvider::classify(const std::string& premise,
                                       const std::string& hypothesis) const {
    nlohmann::json req{{"premise", premise}, {"hypothesis", hypothesis}};
    const nlohmann::json resp = nlohmann::json::parse(post("/nli", req.dump()));
    NliVerdict v;
    v.entailment = resp.at("entailment").get<double>();
    v.neutral = resp.at("neutral").get<double>();
    v.contradiction = resp.at("contradiction").get<double>();
    v.validate();
    return v;
}

} // namespace advprobe
