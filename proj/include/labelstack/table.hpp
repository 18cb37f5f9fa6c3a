#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace labelstack {

enum class ColumnKind { Continuous, Categorical };

struct ColumnSchema {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    std::vector<std::string> categories;  // Categorical only; index = code

    static ColumnSchema continuous(std::string name);
    static ColumnSchema categorical(std::string name, std::vector<std::string> categories);

    bool is_categorical() const noexcept { return kind == ColumnKind::Categorical; }
    std::size_t category_count() const noexcept { return categories.size(); }

    bool operator==(const ColumnSchema&) const = default;
};

using Schema = std::vector<ColumnSchema>;

/// n x p grid of optional cells, stored column-major.
///
/// Categorical cells hold their category code as a double. A missing cell has
/// its mask bit set and its stored value is never read by any arithmetic path;
/// value() on a missing cell is a contract violation.
class DataTable {
public:
    DataTable() = default;
    /// All cells start Missing.
    DataTable(Schema schema, std::size_t n_rows);

    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_cols() const noexcept { return schema_.size(); }
    const Schema& schema() const noexcept { return schema_; }
    const ColumnSchema& column(std::size_t c) const { return schema_.at(c); }

    bool is_missing(std::size_t r, std::size_t c) const noexcept
    {
        return missing_[c * n_rows_ + r] != 0;
    }
    double value(std::size_t r, std::size_t c) const;
    std::optional<double> get(std::size_t r, std::size_t c) const;
    std::size_t category(std::size_t r, std::size_t c) const
    {
        return static_cast<std::size_t>(value(r, c));
    }

    /// Sets a present value. Categorical values must be a valid code.
    void set(std::size_t r, std::size_t c, double v);
    void set_missing(std::size_t r, std::size_t c) noexcept;

    /// Raw column storage. Entries at missing positions are unspecified.
    std::span<const double> column_values(std::size_t c) const
    {
        return {values_.data() + c * n_rows_, n_rows_};
    }

    std::size_t missing_count() const noexcept;
    std::size_t missing_count(std::size_t c) const noexcept;
    bool complete() const noexcept { return missing_count() == 0; }

    /// Column indices of the given kind.
    std::vector<std::size_t> columns_of_kind(ColumnKind kind) const;

    DataTable select_rows(std::span<const std::size_t> rows) const;
    DataTable select_columns(std::span<const std::size_t> cols) const;
    DataTable drop_column(std::size_t c) const;

    /// Same schema and same cells, bit-exact on present values.
    bool operator==(const DataTable& other) const;

private:
    Schema schema_;
    std::size_t n_rows_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
};

/// Concatenate b below a. Schemas must match.
DataTable row_stack(const DataTable& a, const DataTable& b);

/// Append column `extra` (values + its schema) to the right of `t`.
DataTable column_stack(const DataTable& t, const DataTable& extra);

enum class LabelKind { ClassLabel, RegressionTarget };

/// Labels for classification (class codes) or regression (real targets).
struct LabelVector {
    LabelKind kind = LabelKind::ClassLabel;
    std::vector<std::optional<double>> values;
    std::vector<std::string> classes;  // ClassLabel only

    static LabelVector class_labels(std::vector<std::optional<double>> codes,
                                    std::vector<std::string> classes);
    static LabelVector regression(std::vector<std::optional<double>> targets);

    std::size_t size() const noexcept { return values.size(); }
    bool complete() const noexcept;
    std::size_t missing_count() const noexcept;
    bool operator==(const LabelVector&) const = default;

    LabelVector select(std::span<const std::size_t> rows) const;
};

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;
    auto operator<=>(const Cell&) const = default;
};

/// Sorted set of distinct cell coordinates; duplicates are rejected.
class MissingMask {
public:
    MissingMask() = default;
    MissingMask(std::vector<Cell> cells, std::size_t n_rows, std::size_t n_cols);

    /// Mask of every missing cell in a table.
    static MissingMask of(const DataTable& t);

    const std::vector<Cell>& cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }
    bool contains(std::size_t r, std::size_t c) const;
    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_cols() const noexcept { return n_cols_; }

private:
    std::vector<Cell> cells_;
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
};

/// Split the named column off as labels. A categorical column becomes class
/// labels, a continuous one a regression target.
std::pair<DataTable, LabelVector> extract_label(const DataTable& t, const std::string& name);

std::size_t column_index(const DataTable& t, const std::string& name);

}  // namespace labelstack
