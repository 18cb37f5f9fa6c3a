#include "labelstack/table.hpp"

#include "labelstack/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace labelstack {

ColumnSchema ColumnSchema::continuous(std::string name)
{
    return ColumnSchema{std::move(name), ColumnKind::Continuous, {}};
}

ColumnSchema ColumnSchema::categorical(std::string name, std::vector<std::string> categories)
{
    if (categories.empty()) {
        throw UsageError("categorical column '" + name + "' needs at least one category");
    }
    return ColumnSchema{std::move(name), ColumnKind::Categorical, std::move(categories)};
}

DataTable::DataTable(Schema schema, std::size_t n_rows)
    : schema_(std::move(schema)),
      n_rows_(n_rows),
      values_(schema_.size() * n_rows, 0.0),
      missing_(schema_.size() * n_rows, 1)
{
    for (const auto& col : schema_) {
        if (col.is_categorical() && col.categories.empty()) {
            throw UsageError("categorical column '" + col.name + "' has no categories");
        }
        if (!col.is_categorical() && !col.categories.empty()) {
            throw UsageError("continuous column '" + col.name + "' carries categories");
        }
    }
}

double DataTable::value(std::size_t r, std::size_t c) const
{
    if (r >= n_rows_ || c >= n_cols()) {
        throw UsageError("cell index out of range");
    }
    if (is_missing(r, c)) {
        throw UsageError("read of missing cell (" + std::to_string(r) + ", " + std::to_string(c) + ")");
    }
    return values_[c * n_rows_ + r];
}

std::optional<double> DataTable::get(std::size_t r, std::size_t c) const
{
    if (is_missing(r, c)) {
        return std::nullopt;
    }
    return values_[c * n_rows_ + r];
}

void DataTable::set(std::size_t r, std::size_t c, double v)
{
    if (r >= n_rows_ || c >= n_cols()) {
        throw UsageError("cell index out of range");
    }
    const auto& col = schema_[c];
    if (col.is_categorical()) {
        if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(col.category_count())) {
            throw DataError("category code out of range in column '" + col.name + "'");
        }
    } else if (!std::isfinite(v)) {
        throw DataError("non-finite value in column '" + col.name + "'");
    }
    values_[c * n_rows_ + r] = v;
    missing_[c * n_rows_ + r] = 0;
}

void DataTable::set_missing(std::size_t r, std::size_t c) noexcept
{
    values_[c * n_rows_ + r] = 0.0;
    missing_[c * n_rows_ + r] = 1;
}

std::size_t DataTable::missing_count() const noexcept
{
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), std::uint8_t{1}));
}

std::size_t DataTable::missing_count(std::size_t c) const noexcept
{
    const auto first = missing_.begin() + static_cast<std::ptrdiff_t>(c * n_rows_);
    return static_cast<std::size_t>(
        std::count(first, first + static_cast<std::ptrdiff_t>(n_rows_), std::uint8_t{1}));
}

std::vector<std::size_t> DataTable::columns_of_kind(ColumnKind kind) const
{
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < n_cols(); ++c) {
        if (schema_[c].kind == kind) {
            out.push_back(c);
        }
    }
    return out;
}

DataTable DataTable::select_rows(std::span<const std::size_t> rows) const
{
    DataTable out(schema_, rows.size());
    for (std::size_t c = 0; c < n_cols(); ++c) {
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i] >= n_rows_) {
                throw UsageError("row index out of range");
            }
            const std::size_t src = c * n_rows_ + rows[i];
            out.values_[c * out.n_rows_ + i] = values_[src];
            out.missing_[c * out.n_rows_ + i] = missing_[src];
        }
    }
    return out;
}

DataTable DataTable::select_columns(std::span<const std::size_t> cols) const
{
    Schema schema;
    for (auto c : cols) {
        schema.push_back(schema_.at(c));
    }
    DataTable out(std::move(schema), n_rows_);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(cols[j] * n_rows_), n_rows_,
                    out.values_.begin() + static_cast<std::ptrdiff_t>(j * n_rows_));
        std::copy_n(missing_.begin() + static_cast<std::ptrdiff_t>(cols[j] * n_rows_), n_rows_,
                    out.missing_.begin() + static_cast<std::ptrdiff_t>(j * n_rows_));
    }
    return out;
}

DataTable DataTable::drop_column(std::size_t c) const
{
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < n_cols(); ++j) {
        if (j != c) {
            keep.push_back(j);
        }
    }
    return select_columns(keep);
}

bool DataTable::operator==(const DataTable& other) const
{
    if (schema_ != other.schema_ || n_rows_ != other.n_rows_ || missing_ != other.missing_) {
        return false;
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (missing_[i] == 0 &&
            std::bit_cast<std::uint64_t>(values_[i]) != std::bit_cast<std::uint64_t>(other.values_[i])) {
            return false;
        }
    }
    return true;
}

DataTable row_stack(const DataTable& a, const DataTable& b)
{
    if (a.schema() != b.schema()) {
        throw DataError("row_stack: schemas differ");
    }
    DataTable out(a.schema(), a.n_rows() + b.n_rows());
    for (std::size_t c = 0; c < a.n_cols(); ++c) {
        for (std::size_t r = 0; r < a.n_rows(); ++r) {
            if (auto v = a.get(r, c)) {
                out.set(r, c, *v);
            }
        }
        for (std::size_t r = 0; r < b.n_rows(); ++r) {
            if (auto v = b.get(r, c)) {
                out.set(a.n_rows() + r, c, *v);
            }
        }
    }
    return out;
}

DataTable column_stack(const DataTable& t, const DataTable& extra)
{
    if (t.n_rows() != extra.n_rows()) {
        throw DataError("column_stack: row counts differ");
    }
    Schema schema = t.schema();
    schema.insert(schema.end(), extra.schema().begin(), extra.schema().end());
    DataTable out(std::move(schema), t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        for (std::size_t c = 0; c < t.n_cols(); ++c) {
            if (auto v = t.get(r, c)) {
                out.set(r, c, *v);
            }
        }
        for (std::size_t c = 0; c < extra.n_cols(); ++c) {
            if (auto v = extra.get(r, c)) {
                out.set(r, t.n_cols() + c, *v);
            }
        }
    }
    return out;
}

LabelVector LabelVector::class_labels(std::vector<std::optional<double>> codes,
                                      std::vector<std::string> classes)
{
    for (const auto& v : codes) {
        if (v && (!(*v >= 0.0) || *v != std::floor(*v) || *v >= static_cast<double>(classes.size()))) {
            throw DataError("class label code out of range");
        }
    }
    return LabelVector{LabelKind::ClassLabel, std::move(codes), std::move(classes)};
}

LabelVector LabelVector::regression(std::vector<std::optional<double>> targets)
{
    return LabelVector{LabelKind::RegressionTarget, std::move(targets), {}};
}

bool LabelVector::complete() const noexcept
{
    return missing_count() == 0;
}

std::size_t LabelVector::missing_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](const auto& v) { return !v.has_value(); }));
}

LabelVector LabelVector::select(std::span<const std::size_t> rows) const
{
    LabelVector out{kind, {}, classes};
    out.values.reserve(rows.size());
    for (auto r : rows) {
        out.values.push_back(values.at(r));
    }
    return out;
}

MissingMask::MissingMask(std::vector<Cell> cells, std::size_t n_rows, std::size_t n_cols)
    : cells_(std::move(cells)), n_rows_(n_rows), n_cols_(n_cols)
{
    std::sort(cells_.begin(), cells_.end());
    if (std::adjacent_find(cells_.begin(), cells_.end()) != cells_.end()) {
        throw UsageError("mask contains duplicate cells");
    }
    for (const auto& c : cells_) {
        if (c.row >= n_rows_ || c.col >= n_cols_) {
            throw UsageError("mask cell out of range");
        }
    }
}

MissingMask MissingMask::of(const DataTable& t)
{
    std::vector<Cell> cells;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        for (std::size_t c = 0; c < t.n_cols(); ++c) {
            if (t.is_missing(r, c)) {
                cells.push_back({r, c});
            }
        }
    }
    return MissingMask(std::move(cells), t.n_rows(), t.n_cols());
}

bool MissingMask::contains(std::size_t r, std::size_t c) const
{
    return std::binary_search(cells_.begin(), cells_.end(), Cell{r, c});
}

std::size_t column_index(const DataTable& t, const std::string& name)
{
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (t.column(c).name == name) {
            return c;
        }
    }
    throw DataError("no column named '" + name + "'");
}

std::pair<DataTable, LabelVector> extract_label(const DataTable& t, const std::string& name)
{
    const std::size_t lc = column_index(t, name);
    const auto& col = t.column(lc);
    std::vector<std::optional<double>> values(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        values[r] = t.get(r, lc);
    }
    LabelVector y = col.is_categorical() ? LabelVector::class_labels(std::move(values), col.categories)
                                         : LabelVector::regression(std::move(values));
    return {t.drop_column(lc), std::move(y)};
}

}  // namespace labelstack
