#pragma once

#include "labelstack/forest.hpp"
#include "labelstack/table.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace labelstack {

struct MissForestParams {
    ForestParams forest;
    std::size_t max_iter = 10;
    std::uint64_t seed = 0;
    Execution exec = Execution::Parallel;
};

struct IterationRecord {
    std::size_t iter = 0;  // 1-based sweep number
    std::optional<double> delta_continuous;
    std::optional<double> delta_categorical;
    std::size_t na_count_categorical = 0;
};

enum class StopReason { NothingMissing, DeltaIncreased, MaxIter };

struct IterationTrace {
    std::vector<IterationRecord> records;
    StopReason stop = StopReason::NothingMissing;
    std::size_t returned_iter = 0;  // sweep whose matrix was returned; 0 = initial fill
};

struct MissForestResult {
    DataTable imputed;
    IterationTrace trace;
};

/// Deterministic regression imputation: no posterior draws.
struct MiceParams {
    std::size_t n_iter = 10;
    double ridge = 1e-8;
    std::uint64_t seed = 0;  // unused by the deterministic sweeps; kept for provenance
};

using ImputerChoice = std::variant<MissForestParams, MiceParams>;

/// Mean for continuous columns, mode (ties to the smallest code) for
/// categorical ones. Observed cells are untouched.
DataTable init_impute(const DataTable& table);

/// Column indices by ascending missing count, ties by index.
std::vector<std::size_t> order_columns_by_missing(const DataTable& table);

/// sum_F (new - old)^2 / sum_F new^2 over every cell of the columns in F.
double delta_continuous(const DataTable& x_new, const DataTable& x_old, std::span<const std::size_t> F);

/// Fraction of originally-missing cells in the columns G whose category
/// changed between the two matrices.
double delta_categorical(const DataTable& x_new, const DataTable& x_old, std::span<const std::size_t> G,
                         const MissingMask& mask);

/// Iterative random-forest imputation.
///
/// Starting from init_impute, each sweep visits columns by ascending missing
/// count; a column with missing cells gets a forest (regression or
/// classification by column kind) fit on its observed rows against the
/// current values of every other column, and its originally-missing cells are
/// overwritten with the forest's predictions. After each sweep the continuous
/// and categorical change statistics are computed; the loop stops as soon as
/// one of them strictly increases over the previous sweep and returns the
/// previous sweep's matrix, else it runs max_iter sweeps.
MissForestResult missforest_impute(const DataTable& table, const MissForestParams& params);

/// Chained-equation imputation with ridge least squares per column.
/// Categorical predictors are one-hot encoded with the first present
/// category dropped; categorical targets use one-vs-rest scores.
DataTable mice_impute(const DataTable& table, const MiceParams& params);

/// Dispatch on the imputer choice.
DataTable impute(const DataTable& table, const ImputerChoice& choice);

/// CSV with header iter,delta_continuous,delta_categorical.
void write_trace_csv(std::ostream& out, const IterationTrace& trace);

}  // namespace labelstack
