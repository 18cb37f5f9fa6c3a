#pragma once

#include "labelstack/execution.hpp"
#include "labelstack/forest.hpp"
#include "labelstack/imputers.hpp"
#include "labelstack/strategies.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace labelstack {

enum class Method { Cbmi, IclfMissForest, IclfMice, RfMissing, IulVsDiMissForest, IulVsDiMice };

std::string_view method_name(Method m) noexcept;
Method parse_method(std::string_view name);
std::string_view scenario_name(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);

struct ExperimentConfig {
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> schema;  // JSON sidecar
    std::string dataset_name;
    std::string label;
    Scenario scenario = Scenario::TestMissing;
    std::vector<double> rates;
    std::size_t repetitions = 10;
    std::vector<Method> methods;
    std::uint64_t master_seed = 0;
    double train_ratio = 0.6;
    ForestParams forest;
    std::size_t max_iter = 10;
    MiceParams mice;

    void validate() const;
};

/// Rates used when a config omits them: 20..80% and, with a fully observed
/// test set, also 0%.
std::vector<double> default_rates(Scenario scenario);

/// JSON config. Relative dataset/schema paths resolve against base_dir.
ExperimentConfig parse_config_json(std::string_view text, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunRecord {
    std::string dataset;
    std::string method;
    Scenario scenario = Scenario::TestMissing;
    double rate = 0.0;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    std::optional<double> masked_mse;
    std::optional<double> accuracy;
    std::optional<double> downstream_mse;  // regression targets only
    double wall_time_seconds = 0.0;
    std::string error;  // empty on success

    bool ok() const noexcept { return error.empty(); }
};

struct Summary {
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<double> sd;  // sample standard deviation, n - 1 denominator
};

Summary summarize(const std::vector<double>& values);

struct Aggregate {
    std::string method;
    double rate = 0.0;
    std::size_t runs = 0;
    std::size_t failed = 0;
    Summary accuracy;
    Summary masked_mse;
    Summary downstream_mse;
    Summary wall_time;
};

struct ExperimentReport {
    std::vector<RunRecord> records;     // ordered by (method, rate, repetition)
    std::vector<Aggregate> aggregates;  // ordered by (method, rate)
};

/// Repetition seed: a pure function of the master seed and index.
std::uint64_t repetition_seed(std::uint64_t master, std::size_t repetition) noexcept;

/// Runs every (repetition, rate, method) cell. Within a repetition and rate
/// every method sees the same split, the same masks and the same scaling.
/// Repetitions may run concurrently under Parallel; the report is identical
/// either way.
ExperimentReport run_experiment(const ExperimentConfig& config, Execution exec = Execution::Parallel);

std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records);

enum class ReportFormat { Csv, Json };

/// Writes runs.csv, timings.csv, aggregates.csv and curves.csv (for Csv)
/// and report.json (for Json). Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& out_dir,
                                               const std::vector<ReportFormat>& formats);

/// Six significant digits, the report number format.
std::string format_report_number(double v);

}  // namespace labelstack
