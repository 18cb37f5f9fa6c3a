#include "labelstack/imputers.hpp"

#include "labelstack/csv.hpp"
#include "labelstack/error.hpp"
#include "labelstack/linalg.hpp"
#include "labelstack/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace labelstack {

namespace {

void require_observed_columns(const DataTable& table)
{
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        if (table.n_rows() > 0 && table.missing_count(c) == table.n_rows()) {
            throw DataError("column '" + table.column(c).name + "' is entirely missing");
        }
    }
}

struct RowSplit {
    std::vector<std::size_t> observed;
    std::vector<std::size_t> missing;
};

RowSplit split_rows(const DataTable& table, std::size_t c)
{
    RowSplit s;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        (table.is_missing(r, c) ? s.missing : s.observed).push_back(r);
    }
    return s;
}

LabelVector column_as_labels(const DataTable& table, std::size_t c, std::span<const std::size_t> rows)
{
    std::vector<std::optional<double>> v;
    v.reserve(rows.size());
    for (auto r : rows) {
        v.push_back(table.value(r, c));
    }
    const auto& col = table.column(c);
    return col.is_categorical() ? LabelVector::class_labels(std::move(v), col.categories)
                                : LabelVector::regression(std::move(v));
}

}  // namespace

DataTable init_impute(const DataTable& table)
{
    require_observed_columns(table);
    DataTable out = table;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        if (table.missing_count(c) == 0) {
            continue;
        }
        double fill = 0.0;
        if (table.column(c).is_categorical()) {
            std::vector<std::size_t> counts(table.column(c).category_count(), 0);
            for (std::size_t r = 0; r < table.n_rows(); ++r) {
                if (!table.is_missing(r, c)) {
                    ++counts[table.category(r, c)];
                }
            }
            fill = static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        } else {
            std::optional<double> base;
            double dev = 0.0;
            std::size_t n = 0;
            for (std::size_t r = 0; r < table.n_rows(); ++r) {
                if (auto v = table.get(r, c)) {
                    if (!base) {
                        base = *v;
                    }
                    dev += *v - *base;
                    ++n;
                }
            }
            fill = *base + dev / static_cast<double>(n);
        }
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (table.is_missing(r, c)) {
                out.set(r, c, fill);
            }
        }
    }
    return out;
}

std::vector<std::size_t> order_columns_by_missing(const DataTable& table)
{
    std::vector<std::size_t> order(table.n_cols());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> counts(table.n_cols());
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        counts[c] = table.missing_count(c);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
    return order;
}

double delta_continuous(const DataTable& x_new, const DataTable& x_old, std::span<const std::size_t> F)
{
    if (x_new.n_rows() != x_old.n_rows() || x_new.n_cols() != x_old.n_cols()) {
        throw UsageError("delta_continuous: tables differ in shape");
    }
    if (F.empty()) {
        throw UsageError("delta_continuous: empty feature set");
    }
    double num = 0.0;
    double den = 0.0;
    for (auto c : F) {
        for (std::size_t r = 0; r < x_new.n_rows(); ++r) {
            const double a = x_new.value(r, c);
            const double d = a - x_old.value(r, c);
            num += d * d;
            den += a * a;
        }
    }
    if (den == 0.0) {
        throw DataError("delta_continuous: zero denominator");
    }
    return num / den;
}

double delta_categorical(const DataTable& x_new, const DataTable& x_old, std::span<const std::size_t> G,
                         const MissingMask& mask)
{
    if (x_new.n_rows() != x_old.n_rows() || x_new.n_cols() != x_old.n_cols()) {
        throw UsageError("delta_categorical: tables differ in shape");
    }
    std::vector<std::uint8_t> in_g(x_new.n_cols(), 0);
    for (auto c : G) {
        in_g.at(c) = 1;
    }
    std::size_t na = 0;
    std::size_t changed = 0;
    for (const auto& cell : mask.cells()) {
        if (!in_g[cell.col]) {
            continue;
        }
        ++na;
        if (x_new.value(cell.row, cell.col) != x_old.value(cell.row, cell.col)) {
            ++changed;
        }
    }
    if (na == 0) {
        throw DataError("delta_categorical: no missing categorical cells");
    }
    return static_cast<double>(changed) / static_cast<double>(na);
}

MissForestResult missforest_impute(const DataTable& table, const MissForestParams& params)
{
    if (params.max_iter < 1) {
        throw UsageError("missforest: max_iter must be >= 1");
    }
    MissForestResult result{table, {}};
    if (table.complete()) {
        return result;
    }
    require_observed_columns(table);

    const MissingMask mask = MissingMask::of(table);
    const auto F = table.columns_of_kind(ColumnKind::Continuous);
    const auto G = table.columns_of_kind(ColumnKind::Categorical);
    std::size_t na_cont = 0;
    std::size_t na_cat = 0;
    for (const auto& cell : mask.cells()) {
        (table.column(cell.col).is_categorical() ? na_cat : na_cont) += 1;
    }

    const auto order = order_columns_by_missing(table);
    std::vector<RowSplit> rows(table.n_cols());
    for (auto s : order) {
        rows[s] = split_rows(table, s);
    }

    DataTable current = init_impute(table);
    constexpr double inf = std::numeric_limits<double>::infinity();
    double prev_cont = inf;
    double prev_cat = inf;

    for (std::size_t iter = 1; iter <= params.max_iter; ++iter) {
        DataTable previous = current;
        for (auto s : order) {
            const auto& rs = rows[s];
            if (rs.missing.empty()) {
                continue;
            }
            const DataTable predictors = current.drop_column(s);
            const ForestModel forest =
                fit_forest(predictors.select_rows(rs.observed), column_as_labels(current, s, rs.observed),
                           params.forest, derive_seed(params.seed, {iter, s}), params.exec);
            const LabelVector pred = forest.predict(predictors.select_rows(rs.missing));
            for (std::size_t i = 0; i < rs.missing.size(); ++i) {
                current.set(rs.missing[i], s, *pred.values[i]);
            }
        }

        IterationRecord rec{iter, std::nullopt, std::nullopt, na_cat};
        if (na_cont > 0) {
            try {
                rec.delta_continuous = delta_continuous(current, previous, F);
            } catch (const DataError&) {
                // Zero denominator: this criterion drops out, max_iter still applies.
            }
        }
        if (na_cat > 0) {
            rec.delta_categorical = delta_categorical(current, previous, G, mask);
        }
        result.trace.records.push_back(rec);

        const bool increased = (rec.delta_continuous && *rec.delta_continuous > prev_cont) ||
                               (rec.delta_categorical && *rec.delta_categorical > prev_cat);
        if (increased) {
            result.imputed = std::move(previous);
            result.trace.stop = StopReason::DeltaIncreased;
            result.trace.returned_iter = iter - 1;
            return result;
        }
        prev_cont = rec.delta_continuous.value_or(inf);
        prev_cat = rec.delta_categorical.value_or(inf);
    }
    result.imputed = std::move(current);
    result.trace.stop = StopReason::MaxIter;
    result.trace.returned_iter = params.max_iter;
    return result;
}

namespace {

/// Predictor encoding for one MICE target column.
struct Encoding {
    struct Term {
        std::size_t column;
        std::optional<std::size_t> category;  // set for a one-hot indicator
    };
    std::vector<Term> terms;  // design column j + 1 (column 0 is the intercept)

    static Encoding build(const DataTable& current, std::size_t target, std::span<const std::size_t> fit_rows)
    {
        Encoding e;
        for (std::size_t c = 0; c < current.n_cols(); ++c) {
            if (c == target) {
                continue;
            }
            if (!current.column(c).is_categorical()) {
                e.terms.push_back({c, std::nullopt});
                continue;
            }
            std::vector<std::uint8_t> present(current.column(c).category_count(), 0);
            for (auto r : fit_rows) {
                present[current.category(r, c)] = 1;
            }
            bool reference_dropped = false;
            for (std::size_t k = 0; k < present.size(); ++k) {
                if (!present[k]) {
                    continue;
                }
                if (!reference_dropped) {
                    reference_dropped = true;
                    continue;
                }
                e.terms.push_back({c, k});
            }
        }
        return e;
    }

    linalg::Design design(const DataTable& current, std::span<const std::size_t> rows) const
    {
        linalg::Design d{rows.size(), terms.size() + 1, {}};
        d.data.reserve(d.rows * d.cols);
        for (auto r : rows) {
            d.data.push_back(1.0);
            for (const auto& t : terms) {
                const double v = current.value(r, t.column);
                d.data.push_back(t.category ? (static_cast<std::size_t>(v) == *t.category ? 1.0 : 0.0) : v);
            }
        }
        return d;
    }
};

std::vector<double> linear_predict(const linalg::Design& d, const std::vector<double>& beta)
{
    std::vector<double> out(d.rows, 0.0);
    for (std::size_t i = 0; i < d.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d.cols; ++j) {
            s += d(i, j) * beta[j];
        }
        out[i] = s;
    }
    return out;
}

}  // namespace

DataTable mice_impute(const DataTable& table, const MiceParams& params)
{
    if (params.n_iter < 1) {
        throw UsageError("mice: n_iter must be >= 1");
    }
    if (!(params.ridge >= 0.0)) {
        throw UsageError("mice: ridge must be >= 0");
    }
    if (table.complete()) {
        return table;
    }
    require_observed_columns(table);

    const auto order = order_columns_by_missing(table);
    std::vector<RowSplit> rows(table.n_cols());
    for (auto s : order) {
        rows[s] = split_rows(table, s);
    }

    DataTable current = init_impute(table);
    for (std::size_t sweep = 0; sweep < params.n_iter; ++sweep) {
        for (auto s : order) {
            const auto& rs = rows[s];
            if (rs.missing.empty()) {
                continue;
            }
            const Encoding enc = Encoding::build(current, s, rs.observed);
            const auto fit_design = enc.design(current, rs.observed);
            const auto pred_design = enc.design(current, rs.missing);

            if (!table.column(s).is_categorical()) {
                std::vector<double> y;
                y.reserve(rs.observed.size());
                for (auto r : rs.observed) {
                    y.push_back(current.value(r, s));
                }
                std::vector<double> fitted;
                if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); })) {
                    fitted.assign(rs.missing.size(), y.front());
                } else {
                    fitted = linear_predict(pred_design, linalg::least_squares(fit_design, y, params.ridge, 0));
                }
                for (std::size_t i = 0; i < rs.missing.size(); ++i) {
                    if (!std::isfinite(fitted[i])) {
                        throw DataError("mice: non-finite fitted value in column '" + table.column(s).name + "'");
                    }
                    current.set(rs.missing[i], s, fitted[i]);
                }
                continue;
            }

            std::vector<std::size_t> classes;
            {
                std::vector<std::uint8_t> seen(table.column(s).category_count(), 0);
                for (auto r : rs.observed) {
                    seen[table.category(r, s)] = 1;
                }
                for (std::size_t k = 0; k < seen.size(); ++k) {
                    if (seen[k]) {
                        classes.push_back(k);
                    }
                }
            }
            std::vector<double> best_score(rs.missing.size(), -std::numeric_limits<double>::infinity());
            std::vector<std::size_t> best_class(rs.missing.size(), classes.front());
            if (classes.size() > 1) {
                for (auto k : classes) {
                    std::vector<double> indicator;
                    indicator.reserve(rs.observed.size());
                    for (auto r : rs.observed) {
                        indicator.push_back(table.category(r, s) == k ? 1.0 : 0.0);
                    }
                    const auto beta = linalg::least_squares(fit_design, indicator, params.ridge, 0);
                    const auto score = linear_predict(pred_design, beta);
                    for (std::size_t i = 0; i < rs.missing.size(); ++i) {
                        if (score[i] > best_score[i]) {
                            best_score[i] = score[i];
                            best_class[i] = k;
                        }
                    }
                }
            }
            for (std::size_t i = 0; i < rs.missing.size(); ++i) {
                current.set(rs.missing[i], s, static_cast<double>(best_class[i]));
            }
        }
    }
    return current;
}

DataTable impute(const DataTable& table, const ImputerChoice& choice)
{
    return std::visit(
        [&](const auto& p) -> DataTable {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, MissForestParams>) {
                return missforest_impute(table, p).imputed;
            } else {
                return mice_impute(table, p);
            }
        },
        choice);
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace)
{
    out << "iter,delta_continuous,delta_categorical\n";
    for (const auto& r : trace.records) {
        out << r.iter << ',' << (r.delta_continuous ? format_roundtrip(*r.delta_continuous) : "NA") << ','
            << (r.delta_categorical ? format_roundtrip(*r.delta_categorical) : "NA") << '\n';
    }
}

}  // namespace labelstack
