#include "advprobe/remote.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "advprobe/errors.hpp"
#include "advprobe/sha256.hpp"
#include "advprobe/text.hpp"

namespace advprobe {

CompletionClient::CompletionClient(RemoteConfig config) : config_(std::move(config)) {
    if (config_.cache_path.empty()) return;
    std::ifstream in(config_.cache_path);
    if (!in) return; // cache file appears on first write
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            cache_[j.at("key").get<std::string>()] =
                j.at("completions").get<std::vector<std::string>>();
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "warning: skipping corrupt cache line: " << e.what() << "\n";
        }
    }
}

std::string CompletionClient::cache_key(const std::string& prompt, int n) const {
    return sha256_hex(config_.model + "\x1f" + std::to_string(n) + "\x1f" + prompt);
}

std::optional<std::vector<std::string>> CompletionClient::cache_get(const std::string& key) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) return std::nullopt;
    ++cache_hits_;
    return it->second;
}

void CompletionClient::cache_put(const std::string& key, const std::string& prompt, int n,
                                 const std::vector<std::string>& completions) {
    std::lock_guard<std::mutex> lock(mutex_);
    cache_[key] = completions;
    if (config_.cache_path.empty()) return;
    std::ofstream out(config_.cache_path, std::ios::app);
    nlohmann::ordered_json j;
    j["key"] = key;
    j["model"] = config_.model;
    j["n"] = n;
    j["prompt"] = prompt;
    j["completions"] = completions;
    out << j.dump() << '\n';
}

std::vector<std::string> CompletionClient::fetch(const std::string& prompt, int n) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    int backoff = config_.backoff_ms;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        try {
            httplib::Client client(config_.base_url);
            client.set_read_timeout(120, 0);
            httplib::Headers headers;
            if (key && *key) headers.insert({"Authorization", std::string("Bearer ") + key});
            nlohmann::json req{{"model", config_.model},
                               {"prompt", prompt},
                               {"n", n},
                               {"max_tokens", config_.max_tokens},
                               {"temperature", config_.temperature}};
            auto res = client.Post(config_.path, headers, req.dump(), "application/json");
            if (!res) {
                last_error = "transport failure";
                continue;
            }
            if (res->status == 429 || res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue; // throttle and retry
            }
            if (res->status != 200) {
                throw GatewayError("completion endpoint returned HTTP " +
                                   std::to_string(res->status));
            }
            ++network_calls_;
            nlohmann::json resp = nlohmann::json::parse(res->body);
            std::vector<std::string> out;
            for (const auto& choice : resp.at("choices")) {
                out.push_back(text::trim(choice.at("text").get<std::string>()));
                if (static_cast<int>(out.size()) >= n) break;
            }
            return out;
        } catch (const GatewayError&) {
            throw;
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw GatewayError("completion request failed after " + std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

std::vector<std::string> CompletionClient::complete(const std::string& prompt, int n) {
    if (n < 1) throw InputError("completion count must be >= 1");
    const std::string key = cache_key(prompt, n);
    if (auto hit = cache_get(key)) return *hit;
    if (config_.cache_only) {
        throw GatewayError("cache-only mode: no recorded response for prompt (key " + key + ")");
    }
    const std::vector<std::string> completions = fetch(prompt, n);
    cache_put(key, prompt, n, completions);
    return completions;
}

std::vector<CompletionClient::BatchCompletion> CompletionClient::complete_batch(
    const std::vector<std::string>& prompts, int n) {
    std::vector<BatchCompletion> results(prompts.size());
    std::atomic<size_t> next{0};
    const int workers = std::max(1, std::min<int>(config_.max_in_flight,
                                                  static_cast<int>(prompts.size())));
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= prompts.size()) return;
            try {
                results[i].completions = complete(prompts[i], n);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    return results;
}

std::string CompletionClient::first_word_lower(const std::string& completion) {
    return text::first_alpha_word_lower(completion);
}

} // namespace advprobe
