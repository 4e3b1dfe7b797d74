#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "advprobe/lexicon.hpp"

namespace advprobe {

struct CorpusComment {
    std::string id;
    std::string text;
    std::string subreddit;
    std::optional<int64_t> timestamp;
};

struct ParsedToken {
    std::string surface;
    std::string pos;  // coarse tag: ADV, ADJ, PUNCT, WORD
    int head = -1;    // token index of the syntactic head, -1 for root
    std::string dep;  // dependency label, e.g. advmod
    int sentence = 0;
    size_t begin = 0; // char offsets into the parsed text
    size_t end = 0;
};

class ParseProvider {
public:
    virtual ~ParseProvider() = default;
    // InputError on empty text. Token offsets must be consistent with the
    // input; sentence indices must be monotone.
    virtual std::vector<ParsedToken> parse(const std::string& text) const = 0;
};

// Deterministic rule-based tagger covering the `ADV ADJ .` construction:
// adverbs are recognized from the lexicon (plus -ly forms), and the word
// directly following a lexicon adverb is tagged ADJ with an advmod link
// unless it is a function word or itself a lexicon entry. A real dependency
// parser can be substituted through CallbackParseProvider.
class RuleParseProvider : public ParseProvider {
public:
    explicit RuleParseProvider(const Lexicon& lexicon);
    std::vector<ParsedToken> parse(const std::string& text) const override;

private:
    std::set<std::string> adverb_surfaces_;
    std::set<std::string> function_words_;
};

class CallbackParseProvider : public ParseProvider {
public:
    using Fn = std::function<std::vector<ParsedToken>(const std::string&)>;
    explicit CallbackParseProvider(Fn fn) : fn_(std::move(fn)) {}
    std::vector<ParsedToken> parse(const std::string& text) const override;

private:
    Fn fn_;
};

struct ProbeItem {
    std::string source_id;
    std::string context;    // ends in the target phrase
    std::string adverb;     // lowercase lexicon surface
    std::string adjective;  // lowercase
    size_t mask_start = 0;  // char offsets of the adverb within context
    size_t mask_end = 0;
    int word_count = 0;
};

struct ExtractOptions {
    int min_words = 10;
    int max_words = 40;
    int max_sentences = 2;
    // When non-empty, restricts extraction to these adverbs.
    std::set<std::string> restrict_targets;
};

struct ExtractStats {
    size_t comments = 0;
    size_t skipped_empty = 0;
    size_t parse_failures = 0;
    size_t out_of_bounds = 0;
    size_t deduplicated = 0;
    size_t items = 0;
};

// Emits one item per sentence whose final tokens form `ADV ADJ` (adjective
// followed only by terminal punctuation), ADV being a target adverb. Context
// is the sentence plus the preceding one when available, falling back to the
// single sentence when two exceed the word bound. Output is deduplicated on
// exact context and ordered stably by source_id.
std::vector<ProbeItem> extract_items(const std::vector<CorpusComment>& corpus,
                                     const Lexicon& lexicon,
                                     const ParseProvider& provider,
                                     const ExtractOptions& options = {},
                                     ExtractStats* stats = nullptr);

std::vector<CorpusComment> read_comments_jsonl(const std::filesystem::path& path);
void write_items_jsonl(const std::filesystem::path& path, const std::vector<ProbeItem>& items);
std::vector<ProbeItem> read_items_jsonl(const std::filesystem::path& path);

struct CoverageRow {
    std::string adverb;
    int distinct_adjectives = 0;
    bool below_threshold = false;
};

// Distinct-adjective counts per target adverb against a coverage threshold
// (default 40).
std::vector<CoverageRow> coverage_report(const std::vector<ProbeItem>& items,
                                         const Lexicon& lexicon, int threshold = 40);

} // namespace advprobe
