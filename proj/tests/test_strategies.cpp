#include "doctest.h"
#include "support.hpp"

#include "labelstack/error.hpp"
#include "labelstack/preprocess.hpp"
#include "labelstack/strategies.hpp"

using namespace labelstack;

namespace {

MissForestParams small_forest(std::uint64_t seed)
{
    MissForestParams p;
    p.forest.n_trees = 20;
    p.seed = seed;
    return p;
}

DataTable one_column(const std::vector<double>& v)
{
    DataTable t({ColumnSchema::continuous("x")}, v.size());
    for (std::size_t r = 0; r < v.size(); ++r) {
        t.set(r, 0, v[r]);
    }
    return t;
}

}  // namespace

TEST_CASE("stacking appends the label column")
{
    DataTable X({ColumnSchema::continuous("a"), ColumnSchema::continuous("b")}, 3);
    for (std::size_t r = 0; r < 3; ++r) {
        X.set(r, 0, r * 1.0);
        X.set(r, 1, r * 2.0);
    }
    const auto y = LabelVector::class_labels({0.0, 1.0, std::nullopt}, {"u", "v"});
    const StackedTable s = stack_labels(X, y);
    CHECK(s.table.n_cols() == 3);
    CHECK(s.table.column(2).is_categorical());
    CHECK(s.table.is_missing(2, 2));
    CHECK(s.table.category(1, 2) == 1);

    const Unstacked back = unstack_labels(s);
    CHECK(back.X == X);
    CHECK(back.y == y);

    const auto reg = LabelVector::regression({1.5, 2.5, std::nullopt});
    const StackedTable r = stack_labels(X, reg);
    CHECK_FALSE(r.table.column(2).is_categorical());
    CHECK(unstack_labels(r).y == reg);

    CHECK_THROWS(stack_labels(X, LabelVector::regression({1.0})));
}

TEST_CASE("IUL and DI leave complete data unchanged")
{
    const auto [X, y] = testing::iris();
    const Unstacked iul = iul_impute(X, y, small_forest(1));
    CHECK(iul.X == X);
    CHECK(iul.y == y);
    CHECK(di_impute(X, small_forest(1)) == X);
    CHECK(di_impute(X, MiceParams{}) == X);
}

TEST_CASE("IUL preserves observed labels and completes X")
{
    const auto [X, y] = testing::iris();
    const Split s = train_test_split(X, y, 0.6, 3);
    const DataTable masked = apply_mcar(s.train.X, 0.3, 4).table;
    for (const ImputerChoice& imp : {ImputerChoice{small_forest(5)}, ImputerChoice{MiceParams{}}}) {
        const Unstacked out = iul_impute(masked, s.train.y, imp);
        CHECK(out.y == s.train.y);
        CHECK(out.X.complete());
        const DataTable di = di_impute(masked, imp);
        CHECK(di.complete());
        for (std::size_t col = 0; col < 4; ++col) {
            for (std::size_t r = 0; r < masked.n_rows(); ++r) {
                if (!masked.is_missing(r, col)) {
                    CHECK(out.X.value(r, col) == masked.value(r, col));
                    CHECK(di.value(r, col) == masked.value(r, col));
                }
            }
        }
    }
}

TEST_CASE("IUL imputes missing labels")
{
    const auto [X, y] = testing::iris();
    LabelVector holey = y;
    holey.values[0].reset();
    holey.values[120].reset();
    const Unstacked out = iul_impute(X, holey, small_forest(2));
    CHECK(out.y.complete());
    CHECK(out.y.values[0] == y.values[0]);
}

TEST_CASE("CBMI with a single training class predicts it everywhere")
{
    const auto [X, y] = testing::iris();
    const std::vector<std::size_t> train{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const std::vector<std::size_t> test{60, 61, 120, 121};
    const CbmiResult res = cbmi_predict(X.select_rows(train), y.select(train), X.select_rows(test), small_forest(1));
    for (const auto& v : res.y_pred.values) {
        CHECK(*v == *y.values[0]);
    }
}

TEST_CASE("CBMI on separable 1-D data")
{
    std::vector<double> x;
    std::vector<std::optional<double>> codes;
    for (int i = -10; i < 10; ++i) {
        x.push_back(i + 0.5);
        codes.push_back(i < 0 ? 0.0 : 1.0);
    }
    MissForestParams p;
    p.forest.n_trees = 1;
    p.forest.bootstrap = false;
    p.forest.min_leaf = 1;
    const CbmiResult res =
        cbmi_predict(one_column(x), LabelVector::class_labels(codes, {"neg", "pos"}), one_column({5.0}), p);
    CHECK(*res.y_pred.values[0] == 1.0);
    CHECK(res.completed.n_rows() == 21);
}

TEST_CASE("CBMI on complete iris is transductive and error free")
{
    const auto [X, y] = testing::iris();
    const Split s = train_test_split(X, y, 0.6, 8);
    const CbmiResult res = cbmi_predict(s.train.X, s.train.y, s.test.X, small_forest(9));
    CHECK(res.y_pred.complete());
    CHECK(res.y_pred.size() == 60);
    CHECK(res.y_train_imputed == s.train.y);
    CHECK(accuracy(res.y_pred, s.test.y) > 0.85);
    CHECK_THROWS_AS(cbmi_predict(s.train.X, s.train.y, s.test.X.drop_column(0), small_forest(9)), DataError);
}

TEST_CASE("IClf and RF-missing reduce to a plain forest on complete data")
{
    const auto [X, y] = testing::iris();
    const Split s = train_test_split(X, y, 0.6, 10);
    ForestParams fp;
    fp.n_trees = 30;
    const LabelVector plain = fit_forest(s.train.X, s.train.y, fp, 77).predict(s.test.X);
    for (Scenario sc : {Scenario::TestObserved, Scenario::TestMissing}) {
        CHECK(iclf_predict(s.train.X, s.train.y, s.test.X, small_forest(1), fp, 77, sc) == plain);
        CHECK(iclf_predict(s.train.X, s.train.y, s.test.X, MiceParams{}, fp, 77, sc) == plain);
    }
    CHECK(rf_missing_predict(s.train.X, s.train.y, s.test.X, fp, 77) == plain);
}

TEST_CASE("IClf and RF-missing on masked data")
{
    const auto [X, y] = testing::iris();
    const Split s = train_test_split(X, y, 0.6, 11);
    const DataTable train = apply_mcar(s.train.X, 0.3, 1).table;
    const DataTable test = apply_mcar(s.test.X, 0.3, 2).table;
    ForestParams fp;
    fp.n_trees = 30;
    const LabelVector a = iclf_predict(train, s.train.y, test, small_forest(3), fp, 5, Scenario::TestMissing);
    CHECK(a == iclf_predict(train, s.train.y, test, small_forest(3), fp, 5, Scenario::TestMissing));
    CHECK(a.complete());
    CHECK(accuracy(a, s.test.y) > 0.6);

    DataTable blank = test;
    for (std::size_t c = 0; c < 4; ++c) {
        blank.set_missing(0, c);
    }
    const LabelVector r = rf_missing_predict(train, s.train.y, blank, fp, 5);
    CHECK(r.complete());
    CHECK(r == rf_missing_predict(train, s.train.y, blank, fp, 5));
}
