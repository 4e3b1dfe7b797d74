#include "advprobe/dataset_builder.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <json.hpp>

#include "advprobe/errors.hpp"
#include "advprobe/rng.hpp"
#include "advprobe/text.hpp"
#include "advprobe/tsv.hpp"

namespace advprobe {

std::string to_string(Variant v) {
    return v == Variant::FULL_CONTEXT ? "FULL_CONTEXT" : "NEUTRAL";
}

Variant parse_variant(std::string_view s) {
    if (s == "FULL_CONTEXT") return Variant::FULL_CONTEXT;
    if (s == "NEUTRAL") return Variant::NEUTRAL;
    throw ParseError("unknown variant: " + std::string(s));
}

std::vector<MaskedInstance> build_mlm_items(const std::vector<ProbeItem>& items,
                                            MlmBuildStats* stats) {
    MlmBuildStats local;
    MlmBuildStats& st = stats ? *stats : local;
    std::vector<MaskedInstance> out;
    out.reserve(items.size() * 2);
    size_t index = 0;
    for (const ProbeItem& it : items) {
        ++index;
        const std::string item_id = it.source_id + "#" + std::to_string(index);
        if (it.mask_end <= it.mask_start || it.mask_end > it.context.size() ||
            text::to_lower(it.context.substr(it.mask_start, it.mask_end - it.mask_start)) !=
                it.adverb) {
            ++st.rejected;
            std::cerr << "warning: rejected item " << item_id
                      << ": mask span does not cover its adverb\n";
            continue;
        }
        MaskedInstance full;
        full.id = item_id + "/full";
        full.text_with_mask = it.context.substr(0, it.mask_start) + kMaskToken +
                              it.context.substr(it.mask_end);
        full.target = it.adverb;
        full.adjective = it.adjective;
        full.variant = Variant::FULL_CONTEXT;
        out.push_back(std::move(full));

        MaskedInstance neutral;
        neutral.id = item_id + "/neutral";
        neutral.text_with_mask = std::string("is ") + kMaskToken + " " + it.adjective + ".";
        neutral.target = it.adverb;
        neutral.adjective = it.adjective;
        neutral.variant = Variant::NEUTRAL;
        out.push_back(std::move(neutral));
    }
    return out;
}

void write_mlm_jsonl(const std::filesystem::path& path, const std::vector<MaskedInstance>& v) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write MLM dataset: " + path.string());
    for (const MaskedInstance& m : v) {
        nlohmann::ordered_json j;
        j["id"] = m.id;
        j["text"] = m.text_with_mask;
        j["target"] = m.target;
        j["adjective"] = m.adjective;
        j["variant"] = to_string(m.variant);
        out << j.dump() << '\n';
    }
}

std::vector<MaskedInstance> read_mlm_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open MLM dataset: " + path.string());
    std::vector<MaskedInstance> out;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        MaskedInstance m;
        m.id = j.at("id").get<std::string>();
        m.text_with_mask = j.at("text").get<std::string>();
        m.target = j.at("target").get<std::string>();
        m.adjective = j.at("adjective").get<std::string>();
        m.variant = parse_variant(j.at("variant").get<std::string>());
        out.push_back(std::move(m));
    }
    return out;
}

std::string to_string(Condition c) { return c == Condition::BELOW ? "BELOW" : "ABOVE"; }

Condition parse_condition(std::string_view s) {
    if (s == "BELOW") return Condition::BELOW;
    if (s == "ABOVE") return Condition::ABOVE;
    throw ParseError("unknown condition: " + std::string(s));
}

namespace {

ScaleOrder derive_direction(const EntailmentTemplate& t) {
    const bool mask_bounded = t.pattern.find("at least {MASK}") != std::string::npos ||
                              t.pattern.find("at most {MASK}") != std::string::npos;
    const bool premise_bounded = t.pattern.find("at least {PREMISE}") != std::string::npos ||
                                 t.pattern.find("at most {PREMISE}") != std::string::npos;
    if (mask_bounded == premise_bounded) {
        throw ValidationError("template " + std::to_string(t.id) +
                              ": cannot derive expected direction from pattern");
    }
    return mask_bounded ? ScaleOrder::BELOW : ScaleOrder::ABOVE;
}

void validate_template(const EntailmentTemplate& t) {
    const std::string where = "template " + std::to_string(t.id);
    if (text::count_occurrences(t.pattern, "{MASK}") != 1) {
        throw ValidationError(where + ": pattern must contain exactly one {MASK} slot");
    }
    if (text::count_occurrences(t.pattern, "{PREMISE}") != 1) {
        throw ValidationError(where + ": pattern must contain exactly one {PREMISE} slot");
    }
    if (text::count_occurrences(t.pattern, "{ADJ}") < 1) {
        throw ValidationError(where + ": pattern must contain the {ADJ} slot");
    }
    const size_t mask_at = t.pattern.find("{MASK}");
    const size_t premise_at = t.pattern.find("{PREMISE}");
    const MaskPosition derived = mask_at < premise_at ? MaskPosition::BEFORE_PREMISE
                                                      : MaskPosition::AFTER_PREMISE;
    if (derived != t.mask_position) {
        throw ValidationError(where + ": mask_position column disagrees with the pattern");
    }
}

} // namespace

std::vector<EntailmentTemplate> load_templates(const std::filesystem::path& tsv_path) {
    std::vector<EntailmentTemplate> out;
    for (const TsvRow& row : read_tsv(tsv_path, 5)) {
        const std::string where = tsv_path.string() + ":" + std::to_string(row.line_number);
        EntailmentTemplate t;
        try {
            t.id = std::stoi(row.fields[0]);
        } catch (const std::exception&) {
            throw ParseError(where + ": bad template id '" + row.fields[0] + "'");
        }
        t.condition = parse_condition(row.fields[1]);
        t.pattern = row.fields[2];
        if (row.fields[3] == "BEFORE_PREMISE") t.mask_position = MaskPosition::BEFORE_PREMISE;
        else if (row.fields[3] == "AFTER_PREMISE") t.mask_position = MaskPosition::AFTER_PREMISE;
        else throw ParseError(where + ": bad mask_position '" + row.fields[3] + "'");
        if (row.fields[4] == "AT_LEAST") t.polarity_frame = PolarityFrame::AT_LEAST;
        else if (row.fields[4] == "AT_MOST_NEGATED") t.polarity_frame = PolarityFrame::AT_MOST_NEGATED;
        else throw ParseError(where + ": bad polarity_frame '" + row.fields[4] + "'");
        validate_template(t);
        t.expected_direction = derive_direction(t);
        out.push_back(std::move(t));
    }
    for (Condition c : {Condition::BELOW, Condition::ABOVE}) {
        const long n = std::count_if(out.begin(), out.end(),
                                     [&](const EntailmentTemplate& t) { return t.condition == c; });
        if (n != 8) {
            throw ValidationError("expected 8 templates for condition " + to_string(c) + ", got " +
                                  std::to_string(n));
        }
    }
    return out;
}

void apply_paper_exact(std::vector<EntailmentTemplate>& templates) {
    for (EntailmentTemplate& t : templates) {
        if (t.id == 16) {
            t.pattern = "It not {PREMISE} {ADJ} because it is at most {MASK} {ADJ}.";
            t.expected_direction = derive_direction(t);
        }
    }
}

const EntailmentTemplate& template_by_id(const std::vector<EntailmentTemplate>& templates, int id) {
    for (const EntailmentTemplate& t : templates) {
        if (t.id == id) return t;
    }
    throw LookupError("unknown template id: " + std::to_string(id));
}

std::string to_string(FreqBin b) {
    switch (b) {
        case FreqBin::PSEUDO: return "PSEUDO";
        case FreqBin::LOW: return "LOW";
        case FreqBin::MED: return "MED";
        case FreqBin::HIGH: return "HIGH";
    }
    return "?";
}

FreqBin parse_bin(std::string_view s) {
    if (s == "PSEUDO") return FreqBin::PSEUDO;
    if (s == "LOW") return FreqBin::LOW;
    if (s == "MED") return FreqBin::MED;
    if (s == "HIGH") return FreqBin::HIGH;
    throw ParseError("unknown frequency bin: " + std::string(s));
}

std::optional<FreqBin> bin_for_log_freq(double log_freq) {
    if (log_freq >= -18.0 && log_freq < -14.0) return FreqBin::LOW;
    if (log_freq >= -14.0 && log_freq < -10.0) return FreqBin::MED;
    if (log_freq >= -10.0 && log_freq < -6.0) return FreqBin::HIGH;
    return std::nullopt;
}

AdjectivePool AdjectivePool::load(const std::filesystem::path& tsv_path) {
    AdjectivePool pool;
    for (const TsvRow& row : read_tsv(tsv_path, 3)) {
        const std::string where = tsv_path.string() + ":" + std::to_string(row.line_number);
        PoolEntry e;
        e.adjective = text::to_lower(text::trim(row.fields[0]));
        e.bin = parse_bin(row.fields[1]);
        if (row.fields[2] != "NA") {
            try {
                e.log_freq = std::stod(row.fields[2]);
            } catch (const std::exception&) {
                throw ParseError(where + ": bad log_freq '" + row.fields[2] + "'");
            }
        }
        pool.entries.push_back(std::move(e));
    }
    pool.validate();
    return pool;
}

void AdjectivePool::validate() const {
    std::map<FreqBin, int> counts;
    for (const PoolEntry& e : entries) {
        counts[e.bin]++;
        if (e.bin == FreqBin::PSEUDO) {
            if (e.log_freq) {
                throw ValidationError("pseudoword '" + e.adjective + "' must not carry a log_freq");
            }
            continue;
        }
        if (!e.log_freq) {
            throw ValidationError("adjective '" + e.adjective + "' is missing its log_freq");
        }
        const auto bin = bin_for_log_freq(*e.log_freq);
        if (!bin || *bin != e.bin) {
            throw ValidationError("adjective '" + e.adjective + "' log_freq " +
                                  text::format_double(*e.log_freq) + " is outside bin " +
                                  to_string(e.bin));
        }
    }
    for (FreqBin b : {FreqBin::PSEUDO, FreqBin::LOW, FreqBin::MED, FreqBin::HIGH}) {
        if (counts[b] != 40) {
            throw ValidationError("bin " + to_string(b) + " must hold 40 entries, got " +
                                  std::to_string(counts[b]));
        }
    }
}

std::vector<const ScalarAdverb*> eligible_premises(const Lexicon& lexicon, Condition condition,
                                                   const EligibilityOptions& options) {
    std::vector<const ScalarAdverb*> out;
    for (ScaleCategory c : kAllCategories) {
        const GoldScale& scale = lexicon.scale(c);
        const int bottom_rank = lexicon.lookup(scale.bottom_nonneg).gold_rank;
        const int top_rank = lexicon.lookup(scale.top).gold_rank;
        for (const ScalarAdverb* a : lexicon.targets(c)) {
            if (options.exclude_negations && a->is_negation) continue;
            if (condition == Condition::BELOW) {
                if (options.exclude_bottom_for_below && a->gold_rank == bottom_rank) continue;
                if (options.extra_excluded_below.count(a->surface)) continue;
            } else {
                if (options.exclude_top_for_above && a->gold_rank == top_rank) continue;
                if (options.extra_excluded_above.count(a->surface)) continue;
            }
            out.push_back(a);
        }
    }
    return out;
}

std::vector<EntailmentItem> generate_entailment(const std::vector<EntailmentTemplate>& templates,
                                                const AdjectivePool& pool, const Lexicon& lexicon,
                                                const EligibilityOptions& options) {
    std::vector<EntailmentItem> out;
    for (Condition cond : {Condition::BELOW, Condition::ABOVE}) {
        const std::vector<const ScalarAdverb*> premises = eligible_premises(lexicon, cond, options);
        std::vector<const EntailmentTemplate*> ts;
        for (const EntailmentTemplate& t : templates) {
            if (t.condition == cond) ts.push_back(&t);
        }
        std::sort(ts.begin(), ts.end(),
                  [](const EntailmentTemplate* a, const EntailmentTemplate* b) {
                      return a->id < b->id;
                  });
        for (const EntailmentTemplate* t : ts) {
            for (const ScalarAdverb* premise : premises) {
                for (const PoolEntry& adj : pool.entries) {
                    EntailmentItem item;
                    item.id = "t" + std::to_string(t->id) + "-" + premise->surface + "-" +
                              adj.adjective;
                    item.template_id = t->id;
                    item.condition = cond;
                    item.premise = premise->surface;
                    item.adjective = adj.adjective;
                    item.bin = adj.bin;
                    std::string s = text::replace_all(t->pattern, "{PREMISE}", premise->surface);
                    s = text::replace_all(s, "{ADJ}", adj.adjective);
                    s = text::replace_all(s, "{MASK}", kMaskToken);
                    if (text::count_occurrences(s, kMaskToken) != 1) {
                        throw ValidationError("template " + std::to_string(t->id) +
                                              ": instantiation does not contain exactly one mask");
                    }
                    item.surface = std::move(s);
                    out.push_back(std::move(item));
                }
            }
        }
    }
    return out;
}

void write_entailment_jsonl(const std::filesystem::path& path,
                            const std::vector<EntailmentItem>& items) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write entailment dataset: " + path.string());
    for (const EntailmentItem& it : items) {
        nlohmann::ordered_json j;
        j["id"] = it.id;
        j["template_id"] = it.template_id;
        j["condition"] = to_string(it.condition);
        j["premise"] = it.premise;
        j["adjective"] = it.adjective;
        j["bin"] = to_string(it.bin);
        j["surface"] = it.surface;
        out << j.dump() << '\n';
    }
}

std::vector<EntailmentItem> read_entailment_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open entailment dataset: " + path.string());
    std::vector<EntailmentItem> out;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        EntailmentItem it;
        it.id = j.at("id").get<std::string>();
        it.template_id = j.at("template_id").get<int>();
        it.condition = parse_condition(j.at("condition").get<std::string>());
        it.premise = j.at("premise").get<std::string>();
        it.adjective = j.at("adjective").get<std::string>();
        it.bin = parse_bin(j.at("bin").get<std::string>());
        it.surface = j.at("surface").get<std::string>();
        out.push_back(std::move(it));
    }
    return out;
}

std::string to_string(NliLabel l) {
    return l == NliLabel::ENTAILMENT ? "ENTAILMENT" : "CONTRADICTION";
}

namespace {

std::string nli_sentence(const std::string& adverb, const std::string& adjective) {
    return "It is " + adverb + " " + adjective + ".";
}

// Fillers valid for a label: non-negation, same category, strictly on the
// required side of the premise.
std::vector<std::string> nli_fillers(const Lexicon& lexicon, const std::string& premise,
                                     ScaleOrder direction, bool entailing) {
    const ScalarAdverb& p = lexicon.lookup(premise);
    // For ENTAILMENT the filled adverb must sit on the template's expected
    // side of the premise; for CONTRADICTION on the opposite side.
    ScaleOrder want = direction;
    if (!entailing) {
        want = direction == ScaleOrder::BELOW ? ScaleOrder::ABOVE : ScaleOrder::BELOW;
    }
    std::vector<std::string> out;
    for (const ScalarAdverb* a : lexicon.targets(*p.category)) {
        if (a->is_negation) continue;
        if (lexicon.compare(a->surface, premise) == want) out.push_back(a->surface);
    }
    return out;
}

} // namespace

std::vector<NliPair> to_nli(const std::vector<EntailmentItem>& items,
                            const std::vector<EntailmentTemplate>& templates,
                            const Lexicon& lexicon, uint64_t seed, NliBuildStats* stats) {
    NliBuildStats local;
    NliBuildStats& st = stats ? *stats : local;

    struct Pending {
        size_t index;
        bool can_ent;
        bool can_con;
    };
    // Strata: category x condition, in deterministic order.
    std::map<std::pair<int, int>, std::vector<Pending>> strata;
    for (size_t i = 0; i < items.size(); ++i) {
        const EntailmentItem& it = items[i];
        const EntailmentTemplate& t = template_by_id(templates, it.template_id);
        const ScalarAdverb& p = lexicon.lookup(it.premise);
        Pending pend;
        pend.index = i;
        pend.can_ent = !nli_fillers(lexicon, it.premise, t.expected_direction, true).empty();
        pend.can_con = !nli_fillers(lexicon, it.premise, t.expected_direction, false).empty();
        if (!pend.can_ent && !pend.can_con) {
            ++st.skipped_no_filler;
            continue;
        }
        strata[{static_cast<int>(*p.category), static_cast<int>(it.condition)}].push_back(pend);
    }

    Rng rng(seed);
    std::vector<std::pair<size_t, NliLabel>> assignments;
    for (auto& [key, pendings] : strata) {
        rng.shuffle(pendings);
        std::vector<Pending> ent_only, con_only, flexible;
        for (const Pending& p : pendings) {
            if (p.can_ent && p.can_con) flexible.push_back(p);
            else if (p.can_ent) ent_only.push_back(p);
            else con_only.push_back(p);
        }
        // Make the stratum exactly balanced. Feasible iff the usable total is
        // even and the forced-side imbalance fits inside the flexible pool;
        // until then drop from the over-committed side.
        long e = static_cast<long>(ent_only.size());
        long c = static_cast<long>(con_only.size());
        long f = static_cast<long>(flexible.size());
        while ((e + c + f) % 2 != 0 || std::labs(e - c) > f) {
            if (e > c) { ent_only.pop_back(); --e; }
            else if (c > e) { con_only.pop_back(); --c; }
            else { flexible.pop_back(); --f; }
            ++st.dropped_for_balance;
        }
        const long to_ent = (c - e + f) / 2; // flexible items assigned ENTAILMENT
        for (const Pending& p : ent_only) assignments.push_back({p.index, NliLabel::ENTAILMENT});
        for (const Pending& p : con_only) assignments.push_back({p.index, NliLabel::CONTRADICTION});
        for (long i = 0; i < f; ++i) {
            assignments.push_back({flexible[static_cast<size_t>(i)].index,
                                   i < to_ent ? NliLabel::ENTAILMENT : NliLabel::CONTRADICTION});
        }
    }
    std::sort(assignments.begin(), assignments.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<NliPair> out;
    out.reserve(assignments.size());
    for (const auto& [index, label] : assignments) {
        const EntailmentItem& it = items[index];
        const EntailmentTemplate& t = template_by_id(templates, it.template_id);
        const std::vector<std::string> fillers =
            nli_fillers(lexicon, it.premise, t.expected_direction, label == NliLabel::ENTAILMENT);
        const std::string filler = rng.pick(fillers);

        // The scale-higher adverb's sentence entails the lower one's. The
        // item's premise keeps its role: it is the entailing sentence for
        // BELOW-direction templates and the hypothesis for ABOVE-direction
        // ones; the filler takes the other slot.
        NliPair pair;
        pair.item_id = it.id;
        pair.adjective = it.adjective;
        pair.bin = it.bin;
        pair.condition = it.condition;
        pair.label = label;
        if (t.expected_direction == ScaleOrder::BELOW) {
            pair.premise_adverb = it.premise;
            pair.hypothesis_adverb = filler;
        } else {
            pair.premise_adverb = filler;
            pair.hypothesis_adverb = it.premise;
        }
        pair.premise_sentence = nli_sentence(pair.premise_adverb, it.adjective);
        pair.hypothesis_sentence = nli_sentence(pair.hypothesis_adverb, it.adjective);
        out.push_back(std::move(pair));
    }
    return out;
}

void write_nli_jsonl(const std::filesystem::path& path, const std::vector<NliPair>& pairs) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write NLI dataset: " + path.string());
    for (const NliPair& p : pairs) {
        nlohmann::ordered_json j;
        j["premise"] = p.premise_sentence;
        j["hypothesis"] = p.hypothesis_sentence;
        j["label"] = to_string(p.label);
        j["item_id"] = p.item_id;
        j["premise_adverb"] = p.premise_adverb;
        j["hypothesis_adverb"] = p.hypothesis_adverb;
        j["adjective"] = p.adjective;
        j["bin"] = to_string(p.bin);
        j["condition"] = to_string(p.condition);
        out << j.dump() << '\n';
    }
}

std::vector<NliPair> read_nli_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open NLI dataset: " + path.string());
    std::vector<NliPair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        NliPair p;
        p.premise_sentence = j.at("premise").get<std::string>();
        p.hypothesis_sentence = j.at("hypothesis").get<std::string>();
        p.label = j.at("label").get<std::string>() == "ENTAILMENT" ? NliLabel::ENTAILMENT
                                                                   : NliLabel::CONTRADICTION;
        p.item_id = j.value("item_id", "");
        p.premise_adverb = j.value("premise_adverb", "");
        p.hypothesis_adverb = j.value("hypothesis_adverb", "");
        p.adjective = j.value("adjective", "");
        p.bin = parse_bin(j.value("bin", "PSEUDO"));
        p.condition = parse_condition(j.value("condition", "BELOW"));
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace advprobe
