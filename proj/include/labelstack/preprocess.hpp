#pragma once

#include "labelstack/table.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace labelstack {

/// Round half away from zero. Every count derived from a fraction uses this.
std::size_t round_count(double x);

struct LabeledTable {
    DataTable X;
    LabelVector y;
};

struct Split {
    LabeledTable train;
    LabeledTable test;
    std::vector<std::size_t> train_rows;  // indices into the input
    std::vector<std::size_t> test_rows;
};

/// Seeded shuffle split; train gets round(ratio * n) rows.
Split train_test_split(const DataTable& X, const LabelVector& y, double ratio, std::uint64_t seed);

struct MaskedTable {
    DataTable table;
    MissingMask mask;
};

/// MCAR: exactly round(r * n * p) distinct cells, drawn uniformly without
/// replacement, set Missing. The input must be fully observed.
MaskedTable apply_mcar(const DataTable& table, double rate, std::uint64_t seed);

struct ColumnRange {
    double min = 0.0;
    double max = 0.0;
};

/// Per-column min/max over observed entries; nullopt for categorical columns.
struct ScalingParams {
    std::vector<std::optional<ColumnRange>> columns;
};

ScalingParams fit_minmax(const DataTable& fit_table);

/// v -> 2 (v - min) / (max - min) - 1; constant columns map to 0.
DataTable apply_minmax(const DataTable& table, const ScalingParams& params);
DataTable invert_minmax(const DataTable& table, const ScalingParams& params);

struct ScaledTables {
    std::vector<DataTable> tables;
    ScalingParams params;
};

/// Fit on fit_table's observed cells and apply to every table in `apply`.
ScaledTables scale_minmax(const DataTable& fit_table, const std::vector<DataTable>& apply);

double scale_value(double v, const ColumnRange& range) noexcept;
double unscale_value(double s, const ColumnRange& range) noexcept;

struct MseResult {
    double mse = 0.0;
    std::size_t cells = 0;  // masked continuous cells that entered the mean
};

/// Mean squared error over masked continuous cells. Categorical cells are
/// skipped. With no eligible cells the MSE is 0 and cells == 0.
MseResult masked_mse(const DataTable& imputed, const DataTable& original, const MissingMask& mask);

/// Fraction of exact matches; both vectors must be complete.
double accuracy(const LabelVector& pred, const LabelVector& truth);

/// Mean squared error between complete regression vectors.
double label_mse(const LabelVector& pred, const LabelVector& truth);

}  // namespace labelstack
