#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "advprobe/probes.hpp"
#include "advprobe/scale_ranking.hpp"

namespace advprobe {

struct ModelConfig {
    std::string name = "mock-frequency";
    std::string kind = "mock"; // mock | synthetic | http | random
    std::string behavior = "frequency";
    std::string url;
    int layer = -1;
    std::string pooling = "MEAN_SUBTOKENS";
    int dims = 16;
    int batch_size = 16;
};

struct RunConfig {
    ModelConfig model;
    std::filesystem::path lexicon_path;
    std::filesystem::path templates_path;
    std::filesystem::path pool_path;
    std::filesystem::path frames_path;
    std::filesystem::path items_path;       // extracted probe items JSONL
    std::filesystem::path mlm_path;         // masked instances JSONL
    std::filesystem::path entailment_path;  // entailment items JSONL
    std::filesystem::path nli_path;         // NLI pairs JSONL
    std::vector<std::string> probes;        // subset of {rank, mlm, entailment, random, nli}
    std::vector<NegVariant> entailment_variants = {NegVariant::WITH_NEG, NegVariant::NO_NEG};
    uint64_t seed = 0;
    std::filesystem::path output_dir;

    static RunConfig load(const std::filesystem::path& path);
    // All referenced paths must exist before any model is touched.
    void validate() const;
    std::string hash() const; // sha256 of the canonicalized config JSON
    std::string canonical_json() const;
};

struct RankingReportRow {
    RankMethod method = RankMethod::SIM;
    ScaleCategory category = ScaleCategory::MODALITY;
    RankingEvaluation eval;
};

struct Report {
    std::string model_name;
    std::string config_hash;
    std::vector<RankingReportRow> ranking;
    std::vector<MlmAggregate> mlm;
    // label -> result, e.g. "model" and "random-baseline", per variant
    std::vector<std::pair<std::string, EntailmentResult>> entailment;
    std::optional<NliProbeResult> nli;
};

// CSV + aligned-text tables mirroring the reported result layouts; one file
// per table plus tables_schema.json describing the columns. Missing metrics
// render as NA.
void render_tables(const Report& report, const std::filesystem::path& out_dir);

// Row-normalized confusion heatmap as a binary PPM image, rows and columns
// grouped by category in gold order.
void render_heatmap(const ConfusionMatrix& confusion, const std::filesystem::path& path);

// Report JSON including every aggregate (written as report.json by run()).
std::string report_to_json(const Report& report);

// Inverse of report_to_json over the aggregate fields (verdict lists are not
// part of the report file); lets `report` re-render tables and heatmaps.
Report report_from_json(const std::string& json_text);

// Executes the selected probes, writes verdicts, report.json, tables, heatmaps
// and a manifest with the config hash and data checksums. Returns the process
// exit status; partial artifacts and a failure manifest survive probe errors.
int run(const RunConfig& config);

} // namespace advprobe
