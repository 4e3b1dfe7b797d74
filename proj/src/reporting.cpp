#include "advprobe/reporting.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "advprobe/errors.hpp"
#include "advprobe/sha256.hpp"
#include "advprobe/text.hpp"

namespace advprobe {

namespace {

std::string na_or(const std::optional<double>& v, int prec = 4) {
    return v ? text::format_double(*v, prec) : "NA";
}

std::string fmt(double v, int prec = 4) { return text::format_double(v, prec); }

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

// Pads cells into an aligned text table.
std::string align_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i >= widths.size()) widths.push_back(0);
            widths[i] = std::max(widths[i], row[i].size());
        }
    }
    std::string out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            out += row[i];
            if (i + 1 < row.size()) out += std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out += '\n';
    }
    return out;
}

std::string csv_of(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            out += row[i];
            if (i + 1 < row.size()) out += ',';
        }
        out += '\n';
    }
    return out;
}

void emit_table(const std::filesystem::path& dir, const std::string& name,
                const std::vector<std::vector<std::string>>& rows) {
    write_file(dir / (name + ".csv"), csv_of(rows));
    write_file(dir / (name + ".txt"), align_table(rows));
}

const char* kSchemaJson = R"({
  "ranking": ["method", "category", "pairwise_accuracy", "spearman_rho", "kendall_tau_b", "n"],
  "mlm": ["variant", "category", "beat_not_accuracy", "mrr", "n", "failed", "multi_token"],
  "entailment": ["source", "variant", "bin", "condition", "accuracy", "trivial_rate",
                 "correct", "incorrect", "negation", "trivial", "off_category", "failed"],
  "entailment_templates": ["source", "variant", "template_id", "accuracy", "trivial_rate"],
  "entailment_mask_position": ["source", "variant", "mask_position", "accuracy", "trivial_rate"],
  "nli": ["bin", "accuracy", "n"]
}
)";

std::vector<std::vector<std::string>> entailment_rows(
    const std::vector<std::pair<std::string, EntailmentResult>>& results) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"source", "variant", "bin", "condition", "accuracy", "trivial_rate", "correct",
                    "incorrect", "negation", "trivial", "off_category", "failed"});
    auto emit = [&](const std::string& source, const EntailmentResult& r, const std::string& bin,
                    const std::string& condition, const EntailmentCounts& c) {
        rows.push_back({source, to_string(r.variant), bin, condition, na_or(c.accuracy()),
                        na_or(c.trivial_rate()), std::to_string(c.correct),
                        std::to_string(c.incorrect), std::to_string(c.negation),
                        std::to_string(c.trivial), std::to_string(c.off_category),
                        std::to_string(c.failed)});
    };
    for (const auto& [source, r] : results) {
        for (FreqBin bin : {FreqBin::PSEUDO, FreqBin::LOW, FreqBin::MED, FreqBin::HIGH}) {
            for (Condition cond : {Condition::BELOW, Condition::ABOVE}) {
                auto it = r.by_bin_condition.find({bin, cond});
                if (it != r.by_bin_condition.end()) {
                    emit(source, r, to_string(bin), to_string(cond), it->second);
                }
            }
        }
        for (Condition cond : {Condition::BELOW, Condition::ABOVE}) {
            auto it = r.by_condition.find(cond);
            if (it != r.by_condition.end()) emit(source, r, "all", to_string(cond), it->second);
        }
        emit(source, r, "all", "all", r.overall);
    }
    return rows;
}

} // namespace

void render_tables(const Report& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"method", "category", "pairwise_accuracy", "spearman_rho",
                        "kendall_tau_b", "n"});
        for (const RankingReportRow& r : report.ranking) {
            rows.push_back({to_string(r.method), to_string(r.category),
                            fmt(r.eval.pairwise_accuracy), fmt(r.eval.spearman_rho),
                            fmt(r.eval.kendall_tau_b), std::to_string(r.eval.n)});
        }
        emit_table(out_dir, "ranking", rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"variant", "category", "beat_not_accuracy", "mrr", "n", "failed",
                        "multi_token"});
        for (const MlmAggregate& agg : report.mlm) {
            for (ScaleCategory c : kAllCategories) {
                const MlmCell& cell = agg.per_category[static_cast<size_t>(c)];
                rows.push_back({to_string(agg.variant), to_string(c),
                                cell.n ? fmt(cell.beat_not_accuracy) : "NA",
                                cell.n ? fmt(cell.mrr) : "NA", std::to_string(cell.n),
                                std::to_string(cell.failed), std::to_string(cell.multi_token)});
            }
            rows.push_back({to_string(agg.variant), "overall",
                            agg.overall.n ? fmt(agg.overall.beat_not_accuracy) : "NA",
                            agg.overall.n ? fmt(agg.overall.mrr) : "NA",
                            std::to_string(agg.overall.n), std::to_string(agg.overall.failed),
                            std::to_string(agg.overall.multi_token)});
        }
        emit_table(out_dir, "mlm", rows);
    }
    emit_table(out_dir, "entailment", entailment_rows(report.entailment));
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"source", "variant", "template_id", "accuracy", "trivial_rate"});
        for (const auto& [source, r] : report.entailment) {
            for (const auto& [tid, counts] : r.by_template) {
                rows.push_back({source, to_string(r.variant), std::to_string(tid),
                                na_or(counts.accuracy()), na_or(counts.trivial_rate())});
            }
        }
        emit_table(out_dir, "entailment_templates", rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"source", "variant", "mask_position", "accuracy", "trivial_rate"});
        for (const auto& [source, r] : report.entailment) {
            for (const auto& [pos, counts] : r.by_mask_position) {
                rows.push_back({source, to_string(r.variant),
                                pos == MaskPosition::BEFORE_PREMISE ? "MASK_BEFORE_PREMISE"
                                                                    : "PREMISE_BEFORE_MASK",
                                na_or(counts.accuracy()), na_or(counts.trivial_rate())});
            }
        }
        emit_table(out_dir, "entailment_mask_position", rows);
    }
    {
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"bin", "accuracy", "n"});
        if (report.nli) {
            for (FreqBin bin : {FreqBin::PSEUDO, FreqBin::LOW, FreqBin::MED, FreqBin::HIGH}) {
                auto it = report.nli->per_bin.find(bin);
                if (it == report.nli->per_bin.end()) continue;
                rows.push_back({to_string(bin), na_or(report.nli->bin_accuracy(bin)),
                                std::to_string(it->second.second)});
            }
            rows.push_back({"avg", na_or(report.nli->accuracy()),
                            std::to_string(report.nli->n)});
        }
        emit_table(out_dir, "nli", rows);
    }
    write_file(out_dir / "tables_schema.json", kSchemaJson);
}

namespace {

// Two-segment gradient from dark blue through magenta to yellow.
void colormap(double t, unsigned char rgb[3]) {
    const double stops[3][3] = {{13, 8, 135}, {190, 48, 101}, {240, 249, 33}};
    t = std::clamp(t, 0.0, 1.0);
    const int seg = t < 0.5 ? 0 : 1;
    const double local = (t - 0.5 * seg) * 2.0;
    for (int i = 0; i < 3; ++i) {
        rgb[i] = static_cast<unsigned char>(stops[seg][i] +
                                            (stops[seg + 1][i] - stops[seg][i]) * local + 0.5);
    }
}

} // namespace

void render_heatmap(const ConfusionMatrix& confusion, const std::filesystem::path& path) {
    if (confusion.row_labels.empty()) throw ValidationError("confusion matrix is empty");
    constexpr int kCell = 16;
    const size_t rows = confusion.row_labels.size();
    const size_t cols = confusion.col_labels.size();
    const size_t width = cols * kCell;
    const size_t height = rows * kCell;

    std::string pixels;
    pixels.reserve(width * height * 3);
    for (size_t r = 0; r < rows; ++r) {
        const int total = confusion.row_total(r);
        std::vector<std::array<unsigned char, 3>> row_colors(cols);
        for (size_t c = 0; c < cols; ++c) {
            const double t = total > 0 ? static_cast<double>(confusion.counts[r][c]) / total : 0.0;
            colormap(t, row_colors[c].data());
        }
        for (int py = 0; py < kCell; ++py) {
            for (size_t c = 0; c < cols; ++c) {
                for (int px = 0; px < kCell; ++px) {
                    pixels.push_back(static_cast<char>(row_colors[c][0]));
                    pixels.push_back(static_cast<char>(row_colors[c][1]));
                    pixels.push_back(static_cast<char>(row_colors[c][2]));
                }
            }
        }
    }
    std::ostringstream header;
    header << "P6\n" << width << " " << height << "\n255\n";
    write_file(path, header.str() + pixels);
}

// ---- Run configuration ----------------------------------------------------------

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    RunConfig cfg;
    if (j.contains("model")) {
        const auto& m = j["model"];
        cfg.model.name = m.value("name", cfg.model.name);
        cfg.model.kind = m.value("kind", cfg.model.kind);
        cfg.model.behavior = m.value("behavior", cfg.model.behavior);
        cfg.model.url = m.value("url", cfg.model.url);
        cfg.model.layer = m.value("layer", cfg.model.layer);
        cfg.model.pooling = m.value("pooling", cfg.model.pooling);
        cfg.model.dims = m.value("dims", cfg.model.dims);
        cfg.model.batch_size = m.value("batch_size", cfg.model.batch_size);
    }
    auto path_of = [&](const char* key) -> std::filesystem::path {
        return j.contains(key) ? std::filesystem::path(j[key].get<std::string>()) : "";
    };
    cfg.lexicon_path = path_of("lexicon");
    cfg.templates_path = path_of("templates");
    cfg.pool_path = path_of("pool");
    cfg.frames_path = path_of("frames");
    cfg.items_path = path_of("items");
    cfg.mlm_path = path_of("mlm");
    cfg.entailment_path = path_of("entailment");
    cfg.nli_path = path_of("nli");
    if (j.contains("probes")) cfg.probes = j["probes"].get<std::vector<std::string>>();
    if (j.contains("entailment_variants")) {
        cfg.entailment_variants.clear();
        for (const auto& v : j["entailment_variants"]) {
            cfg.entailment_variants.push_back(parse_neg_variant(v.get<std::string>()));
        }
    }
    if (!j.contains("seed")) {
        throw ValidationError(path.string() + ": config must pin an explicit seed");
    }
    cfg.seed = j["seed"].get<uint64_t>();
    if (!j.contains("output_dir")) {
        throw ValidationError(path.string() + ": config must name an output_dir");
    }
    cfg.output_dir = j["output_dir"].get<std::string>();
    return cfg;
}

void RunConfig::validate() const {
    if (lexicon_path.empty()) throw ValidationError("config: lexicon path is required");
    std::vector<std::filesystem::path> paths = {lexicon_path, templates_path, pool_path,
                                                frames_path, items_path, mlm_path,
                                                entailment_path, nli_path};
    for (const auto& p : paths) {
        if (!p.empty() && !std::filesystem::exists(p)) {
            throw ValidationError("config references missing path: " + p.string());
        }
    }
    for (const std::string& probe : probes) {
        if (probe != "rank" && probe != "mlm" && probe != "entailment" && probe != "random" &&
            probe != "nli") {
            throw ValidationError("config: unknown probe '" + probe + "'");
        }
    }
}

std::string RunConfig::canonical_json() const {
    nlohmann::json j; // std::map storage keeps keys sorted
    j["model"] = {{"name", model.name},       {"kind", model.kind},
                  {"behavior", model.behavior},{"url", model.url},
                  {"layer", model.layer},      {"pooling", model.pooling},
                  {"dims", model.dims},        {"batch_size", model.batch_size}};
    j["lexicon"] = lexicon_path.string();
    j["templates"] = templates_path.string();
    j["pool"] = pool_path.string();
    j["frames"] = frames_path.string();
    j["items"] = items_path.string();
    j["mlm"] = mlm_path.string();
    j["entailment"] = entailment_path.string();
    j["nli"] = nli_path.string();
    j["probes"] = probes;
    std::vector<std::string> variants;
    for (NegVariant v : entailment_variants) variants.push_back(to_string(v));
    j["entailment_variants"] = variants;
    j["seed"] = seed;
    j["output_dir"] = output_dir.string();
    return j.dump();
}

std::string RunConfig::hash() const { return sha256_hex(canonical_json()); }

// ---- Report JSON ------------------------------------------------------------------

namespace {

nlohmann::ordered_json counts_json(const EntailmentCounts& c) {
    nlohmann::ordered_json j;
    j["correct"] = c.correct;
    j["incorrect"] = c.incorrect;
    j["negation"] = c.negation;
    j["trivial"] = c.trivial;
    j["off_category"] = c.off_category;
    j["failed"] = c.failed;
    if (auto a = c.accuracy()) j["accuracy"] = *a;
    if (auto t = c.trivial_rate()) j["trivial_rate"] = *t;
    return j;
}

nlohmann::ordered_json confusion_json(const ConfusionMatrix& m) {
    nlohmann::ordered_json j;
    j["rows"] = m.row_labels;
    j["cols"] = m.col_labels;
    j["counts"] = m.counts;
    return j;
}

nlohmann::ordered_json entailment_json(const EntailmentResult& r) {
    nlohmann::ordered_json j;
    j["variant"] = to_string(r.variant);
    j["overall"] = counts_json(r.overall);
    nlohmann::ordered_json bins;
    for (const auto& [key, counts] : r.by_bin_condition) {
        bins[to_string(key.first) + "/" + to_string(key.second)] = counts_json(counts);
    }
    j["by_bin_condition"] = bins;
    nlohmann::ordered_json templates;
    for (const auto& [tid, counts] : r.by_template) {
        templates[std::to_string(tid)] = counts_json(counts);
    }
    j["by_template"] = templates;
    nlohmann::ordered_json positions;
    for (const auto& [pos, counts] : r.by_mask_position) {
        positions[pos == MaskPosition::BEFORE_PREMISE ? "MASK_BEFORE_PREMISE"
                                                      : "PREMISE_BEFORE_MASK"] = counts_json(counts);
    }
    j["by_mask_position"] = positions;
    nlohmann::ordered_json conditions;
    for (const auto& [cond, counts] : r.by_condition) {
        conditions[to_string(cond)] = counts_json(counts);
    }
    j["by_condition"] = conditions;
    j["confusion"] = confusion_json(r.confusion);
    return j;
}

} // namespace

std::string report_to_json(const Report& report) {
    nlohmann::ordered_json j;
    j["model"] = report.model_name;
    j["config_hash"] = report.config_hash;

    nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
    for (const RankingReportRow& r : report.ranking) {
        nlohmann::ordered_json row;
        row["method"] = to_string(r.method);
        row["category"] = to_string(r.category);
        row["pairwise_accuracy"] = r.eval.pairwise_accuracy;
        row["spearman_rho"] = r.eval.spearman_rho;
        row["kendall_tau_b"] = r.eval.kendall_tau_b;
        row["n"] = r.eval.n;
        ranking.push_back(row);
    }
    j["ranking"] = ranking;

    nlohmann::ordered_json mlm = nlohmann::ordered_json::array();
    for (const MlmAggregate& agg : report.mlm) {
        nlohmann::ordered_json a;
        a["variant"] = to_string(agg.variant);
        auto cell_json = [](const MlmCell& c) {
            nlohmann::ordered_json cj;
            cj["mrr"] = c.mrr;
            cj["beat_not_accuracy"] = c.beat_not_accuracy;
            cj["n"] = c.n;
            cj["failed"] = c.failed;
            cj["multi_token"] = c.multi_token;
            return cj;
        };
        for (ScaleCategory c : kAllCategories) {
            a[to_string(c)] = cell_json(agg.per_category[static_cast<size_t>(c)]);
        }
        a["overall"] = cell_json(agg.overall);
        a["confusion"] = confusion_json(agg.confusion);
        mlm.push_back(a);
    }
    j["mlm"] = mlm;

    nlohmann::ordered_json entailment = nlohmann::ordered_json::array();
    for (const auto& [source, r] : report.entailment) {
        nlohmann::ordered_json e = entailment_json(r);
        e["source"] = source;
        entailment.push_back(e);
    }
    j["entailment"] = entailment;

    if (report.nli) {
        nlohmann::ordered_json n;
        if (auto a = report.nli->accuracy()) n["accuracy"] = *a;
        n["n"] = report.nli->n;
        n["failed"] = report.nli->failed;
        for (const auto& [bin, pair] : report.nli->per_bin) {
            nlohmann::ordered_json b;
            b["correct"] = pair.first;
            b["n"] = pair.second;
            n["bins"][to_string(bin)] = b;
        }
        n["confusion"] = report.nli->confusion;
        j["nli"] = n;
    }
    return j.dump(2) + "\n";
}

namespace {

EntailmentCounts counts_from_json(const nlohmann::json& j) {
    EntailmentCounts c;
    c.correct = j.value("correct", 0);
    c.incorrect = j.value("incorrect", 0);
    c.negation = j.value("negation", 0);
    c.trivial = j.value("trivial", 0);
    c.off_category = j.value("off_category", 0);
    c.failed = j.value("failed", 0);
    return c;
}

ConfusionMatrix confusion_from_json(const nlohmann::json& j) {
    ConfusionMatrix m;
    m.row_labels = j.at("rows").get<std::vector<std::string>>();
    m.col_labels = j.at("cols").get<std::vector<std::string>>();
    m.counts = j.at("counts").get<std::vector<std::vector<int>>>();
    return m;
}

MlmCell cell_from_json(const nlohmann::json& j) {
    MlmCell c;
    c.mrr = j.value("mrr", 0.0);
    c.beat_not_accuracy = j.value("beat_not_accuracy", 0.0);
    c.n = j.value("n", 0);
    c.failed = j.value("failed", 0);
    c.multi_token = j.value("multi_token", 0);
    return c;
}

} // namespace

Report report_from_json(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    Report report;
    report.model_name = j.value("model", "");
    report.config_hash = j.value("config_hash", "");
    for (const auto& row : j.value("ranking", nlohmann::json::array())) {
        RankingReportRow r;
        r.method = parse_rank_method(row.at("method").get<std::string>());
        r.category = parse_category(row.at("category").get<std::string>());
        r.eval.pairwise_accuracy = row.at("pairwise_accuracy").get<double>();
        r.eval.spearman_rho = row.at("spearman_rho").get<double>();
        r.eval.kendall_tau_b = row.at("kendall_tau_b").get<double>();
        r.eval.n = row.at("n").get<int>();
        report.ranking.push_back(r);
    }
    for (const auto& a : j.value("mlm", nlohmann::json::array())) {
        MlmAggregate agg;
        agg.variant = parse_variant(a.at("variant").get<std::string>());
        for (ScaleCategory c : kAllCategories) {
            agg.per_category[static_cast<size_t>(c)] = cell_from_json(a.at(to_string(c)));
        }
        agg.overall = cell_from_json(a.at("overall"));
        agg.confusion = confusion_from_json(a.at("confusion"));
        report.mlm.push_back(std::move(agg));
    }
    for (const auto& e : j.value("entailment", nlohmann::json::array())) {
        EntailmentResult r;
        r.variant = parse_neg_variant(e.at("variant").get<std::string>());
        r.overall = counts_from_json(e.at("overall"));
        for (const auto& [key, counts] : e.at("by_bin_condition").items()) {
            const auto parts = text::split(key, '/');
            r.by_bin_condition[{parse_bin(parts.at(0)), parse_condition(parts.at(1))}] =
                counts_from_json(counts);
        }
        for (const auto& [tid, counts] : e.at("by_template").items()) {
            r.by_template[std::stoi(tid)] = counts_from_json(counts);
        }
        for (const auto& [pos, counts] : e.at("by_mask_position").items()) {
            r.by_mask_position[pos == "MASK_BEFORE_PREMISE" ? MaskPosition::BEFORE_PREMISE
                                                            : MaskPosition::AFTER_PREMISE] =
                counts_from_json(counts);
        }
        for (const auto& [cond, counts] : e.at("by_condition").items()) {
            r.by_condition[parse_condition(cond)] = counts_from_json(counts);
        }
        r.confusion = confusion_from_json(e.at("confusion"));
        report.entailment.push_back({e.value("source", "model"), std::move(r)});
    }
    if (j.contains("nli")) {
        NliProbeResult n;
        const auto& nj = j["nli"];
        n.n = nj.value("n", 0);
        n.failed = nj.value("failed", 0);
        if (nj.contains("accuracy")) {
            n.correct = static_cast<int>(nj["accuracy"].get<double>() * n.n + 0.5);
        }
        if (nj.contains("bins")) {
            for (const auto& [bin, b] : nj["bins"].items()) {
                n.per_bin[parse_bin(bin)] = {b.at("correct").get<int>(), b.at("n").get<int>()};
            }
        }
        if (nj.contains("confusion")) {
            n.confusion = nj["confusion"].get<std::array<std::array<int, 3>, 2>>();
        }
        report.nli = std::move(n);
    }
    return report;
}

// ---- Orchestration ------------------------------------------------------------------

namespace {

std::shared_ptr<MaskedLmProvider> make_masked_provider(
    const ModelConfig& model, const Lexicon& lexicon,
    const std::vector<std::pair<std::string, std::string>>& text_targets) {
    if (model.kind == "mock") {
        return make_mock_masked_lm(text_targets, lexicon, parse_mock_behavior(model.behavior));
    }
    if (model.kind == "http") {
        return std::make_shared<HttpModelProvider>(model.url);
    }
    throw CapabilityError("model kind '" + model.kind + "' cannot answer mask queries");
}

} // namespace

int run(const RunConfig& config) {
    config.validate();
    std::filesystem::create_directories(config.output_dir);

    const Lexicon lexicon = Lexicon::load(config.lexicon_path);
    Report report;
    report.model_name = config.model.name;
    report.config_hash = config.hash();

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = report.config_hash;
    manifest["model"] = config.model.name;
    manifest["timestamp"] =
        static_cast<int64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count());
    nlohmann::ordered_json data_files;
    for (const auto& p : {config.lexicon_path, config.templates_path, config.pool_path,
                          config.frames_path, config.items_path, config.mlm_path,
                          config.entailment_path, config.nli_path}) {
        if (!p.empty()) data_files[p.string()] = sha256_file_hex(p);
    }
    manifest["data_files"] = data_files;
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();

    auto selected = [&](const std::string& probe) {
        return std::find(config.probes.begin(), config.probes.end(), probe) != config.probes.end();
    };

    GatewayOptions gateway_options;
    gateway_options.layer = config.model.layer;
    gateway_options.pooling = parse_pooling(config.model.pooling);

    if (selected("rank")) {
        try {
            if (config.frames_path.empty()) {
                throw ValidationError("rank probe requires a frames path");
            }
            std::shared_ptr<EmbeddingProvider> provider;
            if (config.model.kind == "synthetic") {
                provider = std::make_shared<SyntheticEmbeddingProvider>(
                    lexicon, static_cast<size_t>(config.model.dims));
            } else if (config.model.kind == "http") {
                provider = std::make_shared<HttpModelProvider>(config.model.url);
            } else {
                throw CapabilityError("model kind '" + config.model.kind +
                                      "' cannot produce embeddings");
            }
            RankerOptions opts;
            opts.gateway = gateway_options;
            ScaleRanker ranker(lexicon, *provider, load_frame_adjectives(config.frames_path), opts);
            for (RankMethod m : {RankMethod::SIM, RankMethod::DIFF, RankMethod::ADJDIFF}) {
                for (ScaleCategory c : kAllCategories) {
                    RankingReportRow row;
                    row.method = m;
                    row.category = c;
                    row.eval = ranker.evaluate(ranker.rank(m, c));
                    report.ranking.push_back(row);
                }
            }
        } catch (const std::exception& e) {
            failures.push_back({{"probe", "rank"}, {"error", e.what()}});
        }
    }

    if (selected("mlm")) {
        try {
            if (config.mlm_path.empty()) throw ValidationError("mlm probe requires a dataset");
            const std::vector<MaskedInstance> instances = read_mlm_jsonl(config.mlm_path);
            std::vector<std::pair<std::string, std::string>> text_targets;
            for (const MaskedInstance& m : instances) {
                text_targets.push_back({m.text_with_mask, m.target});
            }
            MaskGateway gateway(make_masked_provider(config.model, lexicon, text_targets),
                                gateway_options);
            const MlmResult result = run_mlm_probe(instances, gateway, lexicon);
            write_mlm_verdicts_jsonl(config.output_dir / "mlm_verdicts.jsonl", result.verdicts);
            for (const MlmAggregate& agg : result.aggregates) {
                render_heatmap(agg.confusion,
                               config.output_dir /
                                   ("mlm_confusion_" + text::to_lower(to_string(agg.variant)) +
                                    ".ppm"));
            }
            report.mlm = result.aggregates;
        } catch (const std::exception& e) {
            failures.push_back({{"probe", "mlm"}, {"error", e.what()}});
        }
    }

    if (selected("entailment") || selected("random")) {
        try {
            if (config.entailment_path.empty() || config.templates_path.empty()) {
                throw ValidationError("entailment probes require dataset and templates paths");
            }
            const std::vector<EntailmentItem> items = read_entailment_jsonl(config.entailment_path);
            const std::vector<EntailmentTemplate> templates = load_templates(config.templates_path);
            if (selected("entailment")) {
                std::vector<std::pair<std::string, std::string>> text_targets;
                for (const EntailmentItem& it : items) text_targets.push_back({it.surface, it.premise});
                MaskGateway gateway(make_masked_provider(config.model, lexicon, text_targets),
                                    gateway_options);
                for (NegVariant variant : config.entailment_variants) {
                    EntailmentResult r =
                        run_entailment_probe(items, templates, gateway, variant, lexicon);
                    write_entailment_verdicts_jsonl(
                        config.output_dir /
                            ("entailment_verdicts_" + text::to_lower(to_string(variant)) + ".jsonl"),
                        r.verdicts);
                    render_heatmap(r.confusion,
                                   config.output_dir /
                                       ("entailment_confusion_" +
                                        text::to_lower(to_string(variant)) + ".ppm"));
                    report.entailment.push_back({"model/" + to_string(variant), std::move(r)});
                }
            }
            if (selected("random")) {
                for (NegVariant variant : config.entailment_variants) {
                    EntailmentResult r =
                        run_random_baseline(items, templates, lexicon, config.seed, variant);
                    write_entailment_verdicts_jsonl(
                        config.output_dir /
                            ("random_verdicts_" + text::to_lower(to_string(variant)) + ".jsonl"),
                        r.verdicts);
                    report.entailment.push_back({"random/" + to_string(variant), std::move(r)});
                }
            }
        } catch (const std::exception& e) {
            failures.push_back({{"probe", "entailment"}, {"error", e.what()}});
        }
    }

    if (selected("nli")) {
        try {
            if (config.nli_path.empty()) throw ValidationError("nli probe requires a dataset");
            const std::vector<NliPair> pairs = read_nli_jsonl(config.nli_path);
            std::shared_ptr<NliProvider> provider;
            if (config.model.kind == "mock") {
                if (config.model.behavior == "uniform") {
                    provider = std::make_shared<UniformNli>(config.seed);
                } else {
                    provider = std::make_shared<GoldOracleNli>(lexicon);
                }
            } else if (config.model.kind == "http") {
                provider = std::make_shared<HttpModelProvider>(config.model.url);
            } else {
                throw CapabilityError("model kind '" + config.model.kind + "' has no NLI head");
            }
            report.nli = run_nli_probe(pairs, *provider);
        } catch (const std::exception& e) {
            failures.push_back({{"probe", "nli"}, {"error", e.what()}});
        }
    }

    render_tables(report, config.output_dir);
    write_file(config.output_dir / "report.json", report_to_json(report));

    std::vector<std::filesystem::path> artifact_paths;
    for (const auto& entry : std::filesystem::directory_iterator(config.output_dir)) {
        if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
        artifact_paths.push_back(entry.path());
    }
    std::sort(artifact_paths.begin(), artifact_paths.end());
    nlohmann::ordered_json artifacts;
    for (const auto& p : artifact_paths) {
        artifacts[p.filename().string()] = sha256_file_hex(p);
    }
    manifest["artifacts"] = artifacts;
    manifest["failures"] = failures;
    manifest["status"] = failures.empty() ? "ok" : "failed";
    write_file(config.output_dir / "manifest.json", manifest.dump(2) + "\n");

    if (!failures.empty()) {
        std::cerr << "run finished with " << failures.size() << " probe failure(s); see manifest\n";
        return 1;
    }
    return 0;
}

} // namespace advprobe
