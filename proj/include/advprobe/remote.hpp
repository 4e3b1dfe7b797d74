#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace advprobe {

struct RemoteConfig {
    std::string base_url;                 // e.g. http://localhost:8000
    std::string path = "/v1/completions"; // OpenAI-style completion endpoint
    std::string model;
    std::string api_key_env = "ADVPROBE_API_KEY";
    int max_tokens = 8;
    double temperature = 1.0;
    int max_retries = 5;
    int backoff_ms = 250; // doubles per retry
    int max_in_flight = 4;
    std::filesystem::path cache_path; // append-only JSONL; empty disables caching
    bool cache_only = false;          // replay mode: cache misses are errors
};

// Completion API client. Every response is cached on disk keyed by
// (model, n, prompt); cached prompts are served without network calls, which
// also gives deterministic replay from recorded fixtures.
class CompletionClient {
public:
    explicit CompletionClient(RemoteConfig config);

    // Up to n whitespace-trimmed completion strings.
    std::vector<std::string> complete(const std::string& prompt, int n);

    struct BatchCompletion {
        std::vector<std::string> completions;
        std::string error; // empty on success
        bool ok() const { return error.empty(); }
    };

    // Batched variant honoring max_in_flight parallel requests; results are
    // positionally aligned with the prompts. Failures after retries are
    // reported per prompt, not thrown.
    std::vector<BatchCompletion> complete_batch(const std::vector<std::string>& prompts, int n);

    // Default post-processing for completions: first alphabetic word,
    // lowercased.
    static std::string first_word_lower(const std::string& completion);

    size_t cache_hits() const { return cache_hits_; }
    size_t network_calls() const { return network_calls_; }

private:
    std::string cache_key(const std::string& prompt, int n) const;
    std::optional<std::vector<std::string>> cache_get(const std::string& key);
    void cache_put(const std::string& key, const std::string& prompt, int n,
                   const std::vector<std::string>& completions);
    std::vector<std::string> fetch(const std::string& prompt, int n);

    RemoteConfig config_;
    std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> cache_;
    size_t cache_hits_ = 0;
    size_t network_calls_ = 0;
};

} // namespace advprobe
