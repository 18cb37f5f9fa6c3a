#pragma once

#include "labelstack/forest.hpp"
#include "labelstack/imputers.hpp"
#include "labelstack/table.hpp"

#include <cstdint>

namespace labelstack {

/// Input table with the label vector appended as its last column.
/// Class labels become a categorical column, regression targets a
/// continuous one; missing labels are Missing cells.
struct StackedTable {
    DataTable table;
    LabelKind label_kind = LabelKind::ClassLabel;
};

StackedTable stack_labels(const DataTable& X, const LabelVector& y, const std::string& label_name = "__label__");

struct Unstacked {
    DataTable X;
    LabelVector y;
};

Unstacked unstack_labels(const StackedTable& stacked);

/// Imputation using labels: impute [X | y] as one table and split it back.
/// Missing labels come back imputed; observed labels come back unchanged.
Unstacked iul_impute(const DataTable& X, const LabelVector& y, const ImputerChoice& imputer);

/// Direct imputation: the same engine on X alone.
DataTable di_impute(const DataTable& X, const ImputerChoice& imputer);

struct CbmiResult {
    LabelVector y_pred;           // test rows
    LabelVector y_train_imputed;  // train rows, missing labels filled
    DataTable completed;          // imputed [train; test] with the label column last
    IterationTrace trace;
};

/// Classification by label imputation.
///
/// Train rows [X_train | y_train] are stacked over test rows [X_test | *],
/// where every test label starts Missing, and the whole matrix goes through
/// missforest_impute. The filled test-label cells are the predictions. No
/// classifier is fit on the training rows alone, and the call never sees
/// test labels.
CbmiResult cbmi_predict(const DataTable& X_train, const LabelVector& y_train, const DataTable& X_test,
                        const MissForestParams& params);

enum class Scenario { TestObserved, TestMissing };

/// Impute-then-classify baseline. The training input is imputed on its own;
/// under TestMissing the test rows are imputed jointly with the (raw)
/// training rows and split back. A forest classifier with the given params
/// and seed is then fit on the imputed training input.
LabelVector iclf_predict(const DataTable& X_train, const LabelVector& y_train, const DataTable& X_test,
                         const ImputerChoice& imputer, const ForestParams& forest, std::uint64_t seed,
                         Scenario scenario);

/// Forest grown and applied directly on data with Missing cells, using
/// majority-direction routing.
LabelVector rf_missing_predict(const DataTable& X_train, const LabelVector& y_train, const DataTable& X_test,
                               const ForestParams& forest, std::uint64_t seed);

}  // namespace labelstack
