#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "magpack/config.hpp"

namespace magpack {

using json = nlohmann::json;

inline const std::vector<std::string>& pipeline_names() {
    static const std::vector<std::string> names = {"transform-tests", "flow-ensemble", "parametrix", "volterra",
                                                   "reference-compare", "kernel-decay", "flat-approx"};
    return names;
}

struct PipelineResult {
    bool pass = false;
    json summary;
    std::vector<std::string> files;
};

// Runs one pipeline and writes CSV, SVG and summary.json into out_dir.
PipelineResult run_pipeline(const std::string& pipeline, const ExperimentConfig& cfg, const std::string& out_dir);

struct CompareResult {
    double relative_l2 = 0.0;  // |a - b| / |b|
    double max_abs = 0.0;
};

// Grids must match (ConfigError otherwise).
CompareResult compare_files(const std::string& a, const std::string& b);

struct AcceptanceResult {
    std::string id;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::vector<std::string> only;  // ids such as "AC-4"; empty runs all
    std::string out_dir;            // empty: no files
    int workers = 1;
    unsigned seed = 1;
    bool verbose = true;  // print each line as it finishes
};

std::vector<AcceptanceResult> run_acceptance(const AcceptanceOptions& opt);

// Output helpers.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& cells);

private:
    std::string path_;
    std::size_t cols_;
};

struct Series {
    std::string name;
    std::vector<double> x, y;
};

// Minimal line chart; log_y plots log10 of positive values.
void write_svg(const std::string& path, const std::string& title, const std::string& xlabel,
               const std::string& ylabel, const std::vector<Series>& series, bool log_y = false);

std::string fmt(double v);

}  // namespace magpack
