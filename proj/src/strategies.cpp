#include "labelstack/strategies.hpp"

#include "labelstack/error.hpp"

#include <numeric>

namespace labelstack {

StackedTable stack_labels(const DataTable& X, const LabelVector& y, const std::string& label_name)
{
    if (X.n_rows() != y.size()) {
        throw UsageError("stack_labels: " + std::to_string(X.n_rows()) + " rows but " +
                         std::to_string(y.size()) + " labels");
    }
    ColumnSchema col = y.kind == LabelKind::ClassLabel ? ColumnSchema::categorical(label_name, y.classes)
                                                       : ColumnSchema::continuous(label_name);
    DataTable label(Schema{std::move(col)}, y.size());
    for (std::size_t r = 0; r < y.size(); ++r) {
        if (y.values[r]) {
            label.set(r, 0, *y.values[r]);
        }
    }
    return {column_stack(X, label), y.kind};
}

Unstacked unstack_labels(const StackedTable& stacked)
{
    const DataTable& t = stacked.table;
    if (t.n_cols() == 0) {
        throw UsageError("unstack_labels: empty table");
    }
    const std::size_t lc = t.n_cols() - 1;
    std::vector<std::optional<double>> values(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        values[r] = t.get(r, lc);
    }
    LabelVector y = stacked.label_kind == LabelKind::ClassLabel
                        ? LabelVector::class_labels(std::move(values), t.column(lc).categories)
                        : LabelVector::regression(std::move(values));
    return {t.drop_column(lc), std::move(y)};
}

Unstacked iul_impute(const DataTable& X, const LabelVector& y, const ImputerChoice& imputer)
{
    if (X.n_cols() == 0) {
        throw UsageError("iul_impute: input has no columns");
    }
    StackedTable stacked = stack_labels(X, y);
    stacked.table = impute(stacked.table, imputer);
    return unstack_labels(stacked);
}

DataTable di_impute(const DataTable& X, const ImputerChoice& imputer)
{
    return impute(X, imputer);
}

CbmiResult cbmi_predict(const DataTable& X_train, const LabelVector& y_train, const DataTable& X_test,
                        const MissForestParams& params)
{
    if (X_train.schema() != X_test.schema()) {
        throw DataError("cbmi: train and test schemas differ");
    }
    if (y_train.kind != LabelKind::ClassLabel) {
        throw DataError("cbmi: classification labels required");
    }
    if (y_train.size() != X_train.n_rows()) {
        throw UsageError("cbmi: label length differs from training rows");
    }
    if (y_train.missing_count() == y_train.size()) {
        throw DataError("cbmi: every training label is missing");
    }

    const LabelVector y_hat =
        LabelVector::class_labels(std::vector<std::optional<double>>(X_test.n_rows()), y_train.classes);
    const StackedTable train = stack_labels(X_train, y_train);
    const StackedTable test = stack_labels(X_test, y_hat);
    const DataTable stacked = row_stack(train.table, test.table);

    MissForestResult imputed = missforest_impute(stacked, params);

    std::vector<std::size_t> train_rows(X_train.n_rows());
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::vector<std::size_t> test_rows(X_test.n_rows());
    std::iota(test_rows.begin(), test_rows.end(), X_train.n_rows());

    const Unstacked all = unstack_labels({imputed.imputed, LabelKind::ClassLabel});
    CbmiResult out{all.y.select(test_rows), all.y.select(train_rows), std::move(imputed.imputed),
                   std::move(imputed.trace)};
    if (!out.y_pred.complete() || !out.y_train_imputed.complete()) {
        throw InvariantViolation("cbmi: label column not fully imputed");
    }
    return out;
}

LabelVector iclf_predict(const DataTable& X_train, const LabelVector& y_train, const DataTable& X_test,
                         const ImputerChoice& imputer, const ForestParams& forest, std::uint64_t seed,
                         Scenario scenario)
{
    if (!y_train.complete()) {
        throw DataError("iclf: training labels must be complete");
    }
    if (X_train.schema() != X_test.schema()) {
        throw DataError("iclf: train and test schemas differ");
    }
    const DataTable train_imp = di_impute(X_train, imputer);

    DataTable test_in = X_test;
    if (scenario == Scenario::TestMissing && !X_test.complete()) {
        const DataTable merged = di_impute(row_stack(X_train, X_test), imputer);
        std::vector<std::size_t> test_rows(X_test.n_rows());
        std::iota(test_rows.begin(), test_rows.end(), X_train.n_rows());
        test_in = merged.select_rows(test_rows);
    }
    const ForestModel model = fit_forest(train_imp, y_train, forest, seed);
    return model.predict(test_in);
}

LabelVector rf_missing_predict(const DataTable& X_train, const LabelVector& y_train, const DataTable& X_test,
                               const ForestParams& forest, std::uint64_t seed)
{
    if (!y_train.complete()) {
        throw DataError("rf-missing: training labels must be complete");
    }
    if (X_train.schema() != X_test.schema()) {
        throw DataError("rf-missing: train and test schemas differ");
    }
    const ForestModel model = fit_forest_on_missing(X_train, y_train, forest, seed);
    return model.predict_with_missing(X_test);
}

}  // namespace labelstack
