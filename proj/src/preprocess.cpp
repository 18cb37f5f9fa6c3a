#include "labelstack/preprocess.hpp"

#include "labelstack/error.hpp"
#include "labelstack/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace labelstack {

std::size_t round_count(double x)
{
    if (!(x >= 0.0)) {
        throw UsageError("round_count: negative or NaN input");
    }
    return static_cast<std::size_t>(std::round(x));
}

Split train_test_split(const DataTable& X, const LabelVector& y, double ratio, std::uint64_t seed)
{
    const std::size_t n = X.n_rows();
    if (y.size() != n) {
        throw UsageError("train_test_split: label length differs from row count");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw UsageError("train_test_split: ratio must lie in (0, 1)");
    }
    if (n < 2) {
        throw DataError("train_test_split: need at least 2 rows");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const std::size_t n_train = round_count(ratio * static_cast<double>(n));
    Split s;
    s.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    s.train = {X.select_rows(s.train_rows), y.select(s.train_rows)};
    s.test = {X.select_rows(s.test_rows), y.select(s.test_rows)};
    return s;
}

MaskedTable apply_mcar(const DataTable& table, double rate, std::uint64_t seed)
{
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw UsageError("apply_mcar: rate must lie in [0, 1)");
    }
    if (!table.complete()) {
        throw DataError("apply_mcar: input already has missing cells");
    }
    const std::size_t total = table.n_rows() * table.n_cols();
    const std::size_t k = round_count(rate * static_cast<double>(total));

    std::vector<std::size_t> cells(total);
    std::iota(cells.begin(), cells.end(), std::size_t{0});
    Rng rng(seed);
    rng.partial_shuffle(std::span<std::size_t>(cells), k);

    MaskedTable out{table, {}};
    std::vector<Cell> masked;
    masked.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Cell cell{cells[i] / table.n_cols(), cells[i] % table.n_cols()};
        out.table.set_missing(cell.row, cell.col);
        masked.push_back(cell);
    }
    out.mask = MissingMask(std::move(masked), table.n_rows(), table.n_cols());
    return out;
}

double scale_value(double v, const ColumnRange& range) noexcept
{
    if (range.max == range.min) {
        return 0.0;
    }
    return 2.0 * (v - range.min) / (range.max - range.min) - 1.0;
}

double unscale_value(double s, const ColumnRange& range) noexcept
{
    if (range.max == range.min) {
        return range.min;
    }
    return (s + 1.0) * 0.5 * (range.max - range.min) + range.min;
}

ScalingParams fit_minmax(const DataTable& fit_table)
{
    ScalingParams params;
    params.columns.resize(fit_table.n_cols());
    for (std::size_t c = 0; c < fit_table.n_cols(); ++c) {
        if (fit_table.column(c).is_categorical()) {
            continue;
        }
        std::optional<ColumnRange> range;
        for (std::size_t r = 0; r < fit_table.n_rows(); ++r) {
            if (auto v = fit_table.get(r, c)) {
                if (!range) {
                    range = ColumnRange{*v, *v};
                } else {
                    range->min = std::min(range->min, *v);
                    range->max = std::max(range->max, *v);
                }
            }
        }
        if (!range) {
            throw DataError("scale_minmax: continuous column '" + fit_table.column(c).name +
                            "' has no observed entries");
        }
        params.columns[c] = range;
    }
    return params;
}

namespace {

template <typename F>
DataTable map_continuous(const DataTable& table, const ScalingParams& params, F f)
{
    if (params.columns.size() != table.n_cols()) {
        throw UsageError("scaling params do not match table width");
    }
    DataTable out = table;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        const auto& range = params.columns[c];
        if (!range) {
            continue;
        }
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (auto v = table.get(r, c)) {
                out.set(r, c, f(*v, *range));
            }
        }
    }
    return out;
}

}  // namespace

DataTable apply_minmax(const DataTable& table, const ScalingParams& params)
{
    return map_continuous(table, params, scale_value);
}

DataTable invert_minmax(const DataTable& table, const ScalingParams& params)
{
    return map_continuous(table, params, unscale_value);
}

ScaledTables scale_minmax(const DataTable& fit_table, const std::vector<DataTable>& apply)
{
    ScaledTables out{{}, fit_minmax(fit_table)};
    for (const auto& t : apply) {
        if (t.schema() != fit_table.schema()) {
            throw DataError("scale_minmax: schema mismatch");
        }
        out.tables.push_back(apply_minmax(t, out.params));
    }
    return out;
}

MseResult masked_mse(const DataTable& imputed, const DataTable& original, const MissingMask& mask)
{
    if (imputed.n_rows() != original.n_rows() || imputed.n_cols() != original.n_cols() ||
        mask.n_rows() != original.n_rows() || mask.n_cols() != original.n_cols()) {
        throw DataError("masked_mse: shape mismatch");
    }
    MseResult res;
    double sum = 0.0;
    for (const auto& cell : mask.cells()) {
        if (original.column(cell.col).is_categorical()) {
            continue;
        }
        const double d = imputed.value(cell.row, cell.col) - original.value(cell.row, cell.col);
        sum += d * d;
        ++res.cells;
    }
    res.mse = res.cells ? sum / static_cast<double>(res.cells) : 0.0;
    return res;
}

double accuracy(const LabelVector& pred, const LabelVector& truth)
{
    if (pred.size() != truth.size()) {
        throw DataError("accuracy: length mismatch");
    }
    if (!pred.complete() || !truth.complete()) {
        throw DataError("accuracy: missing entries");
    }
    if (pred.size() == 0) {
        throw DataError("accuracy: empty vectors");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        hits += (*pred.values[i] == *truth.values[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double label_mse(const LabelVector& pred, const LabelVector& truth)
{
    if (pred.size() != truth.size() || pred.size() == 0) {
        throw DataError("label_mse: length mismatch");
    }
    if (!pred.complete() || !truth.complete()) {
        throw DataError("label_mse: missing entries");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = *pred.values[i] - *truth.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

}  // namespace labelstack
