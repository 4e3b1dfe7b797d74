#include "advprobe/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

#include "advprobe/errors.hpp"
#include "advprobe/text.hpp"

namespace advprobe {

namespace {

bool is_terminal_punct(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c != '.' && c != '!' && c != '?') return false;
    }
    return true;
}

bool is_alpha_word(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalpha(static_cast<unsigned char>(c)) && c != '-') return false;
    }
    return true;
}

const char* kPunctChars = ".,!?;:\"'()[]";

bool is_punct_char(char c) {
    for (const char* p = kPunctChars; *p; ++p) {
        if (*p == c) return true;
    }
    return false;
}

} // namespace

RuleParseProvider::RuleParseProvider(const Lexicon& lexicon) {
    for (const ScalarAdverb& a : lexicon.entries()) adverb_surfaces_.insert(a.surface);
    function_words_ = {
        "a",    "an",   "the",  "this", "that", "these", "those", "i",     "you",   "he",
        "she",  "it",   "we",   "they", "me",   "him",   "her",   "us",    "them",  "my",
        "your", "his",  "its",  "our",  "their","is",    "are",   "was",   "were",  "be",
        "been", "being","am",   "do",   "does", "did",   "have",  "has",   "had",   "will",
        "would","can",  "could","should","shall","may",  "might", "must",  "of",    "in",
        "on",   "at",   "by",   "for",  "with", "to",    "from",  "as",    "and",   "or",
        "but",  "if",   "so",   "no",   "yes",  "there", "here",  "what",  "when",  "where",
        "who",  "whom", "how",  "why",  "which","than",  "then",  "too",   "also",  "just",
        "because", "about", "into", "over", "after", "before", "while", "though"};
}

std::vector<ParsedToken> RuleParseProvider::parse(const std::string& text) const {
    if (text.empty()) throw InputError("parse provider requires non-empty text");
    std::vector<ParsedToken> tokens;

    // Whitespace tokenization with leading/trailing punctuation split off.
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t b = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i == b) continue;
        size_t lo = b, hi = i;
        while (lo < hi && is_punct_char(text[lo])) {
            tokens.push_back({text.substr(lo, 1), "PUNCT", -1, "punct", 0, lo, lo + 1});
            ++lo;
        }
        std::vector<ParsedToken> trailing;
        while (hi > lo && is_punct_char(text[hi - 1])) {
            trailing.push_back({text.substr(hi - 1, 1), "PUNCT", -1, "punct", 0, hi - 1, hi});
            --hi;
        }
        if (hi > lo) {
            tokens.push_back({text.substr(lo, hi - lo), "WORD", -1, "dep", 0, lo, hi});
        }
        tokens.insert(tokens.end(), trailing.rbegin(), trailing.rend());
    }

    // Sentence indices: terminal punctuation runs close a sentence.
    int sent = 0;
    bool saw_terminal = false;
    for (ParsedToken& t : tokens) {
        if (saw_terminal && !(t.pos == "PUNCT" && is_terminal_punct(t.surface))) {
            ++sent;
            saw_terminal = false;
        }
        t.sentence = sent;
        if (t.pos == "PUNCT" && is_terminal_punct(t.surface)) saw_terminal = true;
    }

    // Tagging pass.
    for (size_t k = 0; k < tokens.size(); ++k) {
        ParsedToken& t = tokens[k];
        if (t.pos == "PUNCT") continue;
        const std::string lower = text::to_lower(t.surface);
        const bool lexicon_adverb = adverb_surfaces_.count(lower) > 0;
        const bool ly_adverb = lower.size() > 3 && lower.ends_with("ly");
        if (lexicon_adverb || ly_adverb) {
            t.pos = "ADV";
        }
    }
    // An adverb's following word becomes its ADJ head when it looks adjectival.
    for (size_t k = 0; k + 1 < tokens.size(); ++k) {
        ParsedToken& adv = tokens[k];
        ParsedToken& nxt = tokens[k + 1];
        if (adv.pos != "ADV" || nxt.sentence != adv.sentence) continue;
        if (nxt.pos != "WORD") continue;
        const std::string lower = text::to_lower(nxt.surface);
        if (!is_alpha_word(nxt.surface)) continue;
        if (function_words_.count(lower) || adverb_surfaces_.count(lower)) continue;
        nxt.pos = "ADJ";
        adv.head = static_cast<int>(k + 1);
        adv.dep = "advmod";
    }
    return tokens;
}

std::vector<ParsedToken> CallbackParseProvider::parse(const std::string& text) const {
    if (text.empty()) throw InputError("parse provider requires non-empty text");
    return fn_(text);
}

namespace {

struct SentenceSpan {
    size_t begin = 0; // first char of first token
    size_t end = 0;   // one past last char of last token
    size_t first_token = 0;
    size_t last_token = 0; // inclusive
};

std::vector<SentenceSpan> sentence_spans(const std::vector<ParsedToken>& tokens) {
    std::vector<SentenceSpan> spans;
    for (size_t k = 0; k < tokens.size(); ++k) {
        const ParsedToken& t = tokens[k];
        if (spans.empty() || tokens[spans.back().first_token].sentence != t.sentence) {
            spans.push_back({t.begin, t.end, k, k});
        } else {
            spans.back().end = t.end;
            spans.back().last_token = k;
        }
    }
    return spans;
}

} // namespace

std::vector<ProbeItem> extract_items(const std::vector<CorpusComment>& corpus,
                                     const Lexicon& lexicon, const ParseProvider& provider,
                                     const ExtractOptions& options, ExtractStats* stats) {
    ExtractStats local;
    ExtractStats& st = stats ? *stats : local;
    std::vector<ProbeItem> items;
    std::set<std::string> seen_contexts;

    for (const CorpusComment& comment : corpus) {
        ++st.comments;
        if (text::trim(comment.text).empty()) {
            ++st.skipped_empty;
            continue;
        }
        std::vector<ParsedToken> tokens;
        try {
            tokens = provider.parse(comment.text);
        } catch (const std::exception& e) {
            ++st.parse_failures;
            std::cerr << "warning: parse failure for comment " << comment.id << ": " << e.what()
                      << "\n";
            continue;
        }
        const std::vector<SentenceSpan> sentences = sentence_spans(tokens);
        for (size_t s = 0; s < sentences.size(); ++s) {
            const SentenceSpan& sent = sentences[s];
            // Walk back over trailing terminal punctuation.
            size_t k = sent.last_token + 1;
            bool clean_tail = true;
            while (k > sent.first_token) {
                const ParsedToken& t = tokens[k - 1];
                if (t.pos != "PUNCT") break;
                if (!is_terminal_punct(t.surface)) { clean_tail = false; break; }
                --k;
            }
            if (!clean_tail || k < sent.first_token + 2) continue;
            const ParsedToken& adj = tokens[k - 1];
            const ParsedToken& adv = tokens[k - 2];
            if (adj.pos != "ADJ" || adv.pos != "ADV") continue;
            if (adv.head != static_cast<int>(k - 1) || adv.dep != "advmod") continue;
            const std::string adv_lower = text::to_lower(adv.surface);
            const ScalarAdverb* entry = lexicon.find(adv_lower);
            if (!entry || !entry->is_target) continue;
            if (!options.restrict_targets.empty() && !options.restrict_targets.count(entry->surface))
                continue;

            // Context: previous sentence + this one, shrinking to one when the
            // pair exceeds the word budget.
            bool emitted = false;
            bool duplicate = false;
            for (int width = std::min<int>(options.max_sentences, static_cast<int>(s) + 1);
                 width >= 1; --width) {
                const SentenceSpan& first = sentences[s + 1 - static_cast<size_t>(width)];
                std::string context =
                    text::trim(comment.text.substr(first.begin, sent.end - first.begin));
                const int wc = text::count_words(context);
                if (wc > options.max_words) continue; // try narrower
                if (wc < options.min_words) break;    // narrower is only shorter
                ProbeItem item;
                item.source_id = comment.id;
                item.context = std::move(context);
                item.adverb = entry->surface;
                item.adjective = text::to_lower(adj.surface);
                item.mask_start = adv.begin - first.begin;
                item.mask_end = adv.end - first.begin;
                item.word_count = wc;
                if (text::to_lower(item.context.substr(item.mask_start,
                                                       item.mask_end - item.mask_start)) !=
                    entry->surface) {
                    std::cerr << "warning: mask span mismatch in comment " << comment.id << "\n";
                    emitted = true; // counted, not retried
                    break;
                }
                if (!seen_contexts.insert(item.context).second) {
                    ++st.deduplicated;
                    duplicate = true;
                    break;
                }
                items.push_back(std::move(item));
                ++st.items;
                emitted = true;
                break;
            }
            if (!emitted && !duplicate) ++st.out_of_bounds;
        }
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const ProbeItem& a, const ProbeItem& b) { return a.source_id < b.source_id; });
    return items;
}

std::vector<CorpusComment> read_comments_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open comments file: " + path.string());
    std::vector<CorpusComment> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        CorpusComment c;
        c.id = j.contains("id") ? j["id"].get<std::string>() : std::to_string(lineno);
        if (j.contains("body")) c.text = j["body"].get<std::string>();
        else if (j.contains("text")) c.text = j["text"].get<std::string>();
        if (j.contains("subreddit")) c.subreddit = j["subreddit"].get<std::string>();
        if (j.contains("created_utc")) c.timestamp = j["created_utc"].get<int64_t>();
        out.push_back(std::move(c));
    }
    return out;
}

void write_items_jsonl(const std::filesystem::path& path, const std::vector<ProbeItem>& items) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write items file: " + path.string());
    for (const ProbeItem& it : items) {
        nlohmann::ordered_json j;
        j["source_id"] = it.source_id;
        j["context"] = it.context;
        j["adverb"] = it.adverb;
        j["adjective"] = it.adjective;
        j["mask_start"] = it.mask_start;
        j["mask_end"] = it.mask_end;
        j["word_count"] = it.word_count;
        out << j.dump() << '\n';
    }
}

std::vector<ProbeItem> read_items_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open items file: " + path.string());
    std::vector<ProbeItem> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        ProbeItem it;
        it.source_id = j.at("source_id").get<std::string>();
        it.context = j.at("context").get<std::string>();
        it.adverb = j.at("adverb").get<std::string>();
        it.adjective = j.at("adjective").get<std::string>();
        it.mask_start = j.at("mask_start").get<size_t>();
        it.mask_end = j.at("mask_end").get<size_t>();
        it.word_count = j.at("word_count").get<int>();
        out.push_back(std::move(it));
    }
    return out;
}

std::vector<CoverageRow> coverage_report(const std::vector<ProbeItem>& items,
                                         const Lexicon& lexicon, int threshold) {
    std::map<std::string, std::set<std::string>> adjectives;
    for (const ProbeItem& it : items) adjectives[it.adverb].insert(it.adjective);
    std::vector<CoverageRow> rows;
    for (ScaleCategory c : kAllCategories) {
        for (const ScalarAdverb* a : lexicon.targets(c)) {
            CoverageRow row;
            row.adverb = a->surface;
            auto found = adjectives.find(a->surface);
            row.distinct_adjectives =
                found == adjectives.end() ? 0 : static_cast<int>(found->second.size());
            row.below_threshold = row.distinct_adjectives < threshold;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace advprobe
