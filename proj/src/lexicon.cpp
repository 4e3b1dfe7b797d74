#include "advprobe/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "advprobe/errors.hpp"
#include "advprobe/text.hpp"
#include "advprobe/tsv.hpp"

namespace advprobe {

std::string to_string(ScaleCategory c) {
    switch (c) {
        case ScaleCategory::MODALITY: return "MODALITY";
        case ScaleCategory::FREQUENCY: return "FREQUENCY";
        case ScaleCategory::DEGREE: return "DEGREE";
    }
    return "?";
}

ScaleCategory parse_category(std::string_view s) {
    if (s == "MODALITY") return ScaleCategory::MODALITY;
    if (s == "FREQUENCY") return ScaleCategory::FREQUENCY;
    if (s == "DEGREE") return ScaleCategory::DEGREE;
    throw ParseError("unknown scale category: " + std::string(s));
}

std::string to_string(ScaleOrder o) {
    switch (o) {
        case ScaleOrder::BELOW: return "BELOW";
        case ScaleOrder::ABOVE: return "ABOVE";
        case ScaleOrder::TIED: return "TIED";
        case ScaleOrder::INCOMPARABLE: return "INCOMPARABLE";
    }
    return "?";
}

namespace {

bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "0" || s == "false") return false;
    if (s == "1" || s == "true") return true;
    throw ParseError(where + ": expected boolean 0/1, got '" + s + "'");
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": expected a number, got '" + s + "'");
    }
}

} // namespace

Lexicon Lexicon::load(const std::filesystem::path& tsv_path) {
    Lexicon lex;
    std::set<std::string> seen;
    for (const TsvRow& row : read_tsv(tsv_path, 7)) {
        const std::string where = tsv_path.string() + ":" + std::to_string(row.line_number);
        ScalarAdverb adv;
        adv.surface = text::to_lower(text::trim(row.fields[0]));
        if (adv.surface.empty()) throw ParseError(where + ": empty adverb");
        if (!seen.insert(adv.surface).second) {
            throw ValidationError(where + ": duplicate adverb '" + adv.surface + "'");
        }
        const std::string cat = text::trim(row.fields[1]);
        if (cat != "NONE") adv.category = parse_category(cat);
        adv.gold_rank = static_cast<int>(parse_double(row.fields[2], where));
        adv.is_negation = parse_bool(row.fields[3], where);
        adv.is_target = parse_bool(row.fields[4], where);
        adv.wordfreq_rel = parse_double(row.fields[5], where);
        adv.reddit_rel = parse_double(row.fields[6], where);
        if (adv.is_target && !adv.category) {
            throw ValidationError(where + ": target adverb without category");
        }
        if (adv.wordfreq_rel <= 0.0 || adv.wordfreq_rel >= 1.0 ||
            adv.reddit_rel <= 0.0 || adv.reddit_rel >= 1.0) {
            throw ValidationError(where + ": relative frequencies must lie in (0,1)");
        }
        lex.entries_.push_back(std::move(adv));
    }
    lex.validate();
    lex.build_scales();
    return lex;
}

void Lexicon::save(const std::filesystem::path& tsv_path) const {
    std::ofstream out(tsv_path);
    if (!out) throw Error("cannot write lexicon file: " + tsv_path.string());
    out << "# adverb\tcategory\tgold_rank\tis_negation\tis_target\twordfreq_rel\treddit_rel\n";
    for (const ScalarAdverb& a : entries_) {
        out << a.surface << '\t' << (a.category ? to_string(*a.category) : "NONE") << '\t'
            << a.gold_rank << '\t' << (a.is_negation ? 1 : 0) << '\t' << (a.is_target ? 1 : 0)
            << '\t' << text::format_double(a.wordfreq_rel, 12) << '\t'
            << text::format_double(a.reddit_rel, 12) << '\n';
    }
}

void Lexicon::validate() const {
    for (ScaleCategory c : kAllCategories) {
        std::map<int, int> by_rank;
        int n = 0;
        for (const ScalarAdverb& a : entries_) {
            if (!a.is_target || a.category != c) continue;
            ++n;
            if (a.gold_rank < 0) {
                throw ValidationError("target adverb '" + a.surface + "' has negative rank");
            }
            by_rank[a.gold_rank]++;
            if (a.is_negation && a.surface != "never" && a.surface != "hardly") {
                throw ValidationError("unexpected negation target: " + a.surface);
            }
        }
        if (n != 8) {
            throw ValidationError("category " + to_string(c) + " must hold exactly 8 targets, got " +
                                  std::to_string(n));
        }
        // Ranks form a contiguous sequence from 0 (ties collapse onto one rank).
        int expect = 0;
        for (const auto& [rank, count] : by_rank) {
            if (rank != expect) {
                throw ValidationError("category " + to_string(c) +
                                      ": rank gap at " + std::to_string(rank));
            }
            ++expect;
        }
    }
    const ScalarAdverb* not_entry = find("not");
    if (!not_entry || not_entry->is_target) {
        throw ValidationError("'not' must be present and flagged non-target");
    }
}

void Lexicon::build_scales() {
    for (ScaleCategory c : kAllCategories) {
        GoldScale scale;
        scale.category = c;
        std::map<int, std::vector<std::string>> groups;
        for (const ScalarAdverb& a : entries_) {
            if (a.is_target && a.category == c) groups[a.gold_rank].push_back(a.surface);
        }
        for (auto& [rank, words] : groups) {
            std::sort(words.begin(), words.end());
            scale.ordering.push_back(words);
        }
        scale.top = scale.ordering.back().front();
        for (const auto& group : scale.ordering) {
            bool all_negation = true;
            for (const std::string& w : group) all_negation &= lookup(w).is_negation;
            if (!all_negation) {
                scale.bottom_nonneg = group.front();
                break;
            }
        }
        // The reference bottoms are pinned data: sometimes, maybe, slightly.
        // FREQUENCY's is NOT the lowest non-negation adverb (occasionally sits
        // below sometimes on the scale); MODALITY's tied group is represented
        // by its first-listed member, reconfigurable via set_modality_bottom.
        const char* pinned = c == ScaleCategory::MODALITY    ? "maybe"
                             : c == ScaleCategory::FREQUENCY ? "sometimes"
                                                             : "slightly";
        if (const ScalarAdverb* p = find(pinned); p && p->is_target && p->category == c) {
            scale.bottom_nonneg = p->surface;
        }
        scales_[static_cast<size_t>(c)] = std::move(scale);
    }
}

const ScalarAdverb* Lexicon::find(std::string_view surface) const {
    const std::string key = text::to_lower(text::trim(surface));
    for (const ScalarAdverb& a : entries_) {
        if (a.surface == key) return &a;
    }
    return nullptr;
}

const ScalarAdverb& Lexicon::lookup(std::string_view surface) const {
    const ScalarAdverb* a = find(surface);
    if (!a) throw LookupError("unknown adverb: '" + std::string(surface) + "'");
    return *a;
}

std::vector<const ScalarAdverb*> Lexicon::targets() const {
    std::vector<const ScalarAdverb*> out;
    for (const ScalarAdverb& a : entries_) {
        if (a.is_target) out.push_back(&a);
    }
    return out;
}

std::vector<const ScalarAdverb*> Lexicon::targets(ScaleCategory c) const {
    std::vector<const ScalarAdverb*> out;
    for (const ScalarAdverb& a : entries_) {
        if (a.is_target && a.category == c) out.push_back(&a);
    }
    return out;
}

const GoldScale& Lexicon::scale(ScaleCategory c) const {
    return scales_[static_cast<size_t>(c)];
}

ScaleOrder Lexicon::compare(std::string_view a, std::string_view b) const {
    const ScalarAdverb& x = lookup(a);
    const ScalarAdverb& y = lookup(b);
    if (!x.category || !y.category || *x.category != *y.category) {
        return ScaleOrder::INCOMPARABLE;
    }
    if (x.gold_rank == y.gold_rank) return ScaleOrder::TIED;
    return x.gold_rank < y.gold_rank ? ScaleOrder::BELOW : ScaleOrder::ABOVE;
}

bool Lexicon::is_negation_answer(std::string_view surface) const {
    const ScalarAdverb* a = find(surface);
    return a != nullptr && a->is_negation;
}

void Lexicon::set_modality_bottom(std::string_view surface) {
    const ScalarAdverb& a = lookup(surface);
    if (a.category != ScaleCategory::MODALITY || a.gold_rank != 0) {
        throw ValidationError("'" + std::string(surface) + "' is not in the MODALITY bottom group");
    }
    scales_[static_cast<size_t>(ScaleCategory::MODALITY)].bottom_nonneg = a.surface;
}

int Lexicon::max_rank(ScaleCategory c) const {
    return static_cast<int>(scale(c).ordering.size()) - 1;
}

} // namespace advprobe
