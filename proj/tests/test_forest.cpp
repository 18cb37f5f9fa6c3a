#include "doctest.h"
#include "support.hpp"

#include "labelstack/error.hpp"
#include "labelstack/forest.hpp"
#include "labelstack/preprocess.hpp"

#include <algorithm>

using namespace labelstack;

namespace {

DataTable one_column(const std::vector<double>& v)
{
    DataTable t({ColumnSchema::continuous("x")}, v.size());
    for (std::size_t r = 0; r < v.size(); ++r) {
        t.set(r, 0, v[r]);
    }
    return t;
}

LabelVector two_classes(const std::vector<double>& codes)
{
    std::vector<std::optional<double>> v(codes.begin(), codes.end());
    return LabelVector::class_labels(v, {"neg", "pos"});
}

TreeNode leaf(double prediction)
{
    TreeNode n;
    n.prediction = prediction;
    return n;
}

}  // namespace

TEST_CASE("parameter defaults follow the task kind")
{
    const auto cls = resolve({}, ForestKind::Classification, 10);
    CHECK(cls.mtry == 4);
    CHECK(cls.min_leaf == 1);
    const auto reg = resolve({}, ForestKind::Regression, 10);
    CHECK(reg.mtry == 4);
    CHECK(reg.min_leaf == 5);
    CHECK(resolve({}, ForestKind::Regression, 2).mtry == 1);
    CHECK(reg.n_trees == 100);
    CHECK(reg.bootstrap);
}

TEST_CASE("impurity helpers")
{
    CHECK(detail::gini_impurity({5.0, 0.0}) == 0.0);
    CHECK(detail::gini_impurity({2.0, 2.0}) == doctest::Approx(2.0));
    CHECK(detail::sse_impurity(3.0, 6.0, 14.0) == doctest::Approx(2.0));
}

TEST_CASE("constant regression target gives constant predictions")
{
    Rng rng(3);
    const DataTable X = testing::random_mixed_table(40, 4, rng);
    const auto y = LabelVector::regression(std::vector<std::optional<double>>(40, 0.1));
    const ForestModel m = fit_forest(X, y, {}, 5);
    for (const auto& v : m.predict(X).values) {
        CHECK(*v == 0.1);
    }
}

TEST_CASE("one tree separates 1-D data exactly")
{
    std::vector<double> x;
    std::vector<double> y;
    for (int i = -10; i < 10; ++i) {
        x.push_back(i + 0.5);
        y.push_back(i < 0 ? 0.0 : 1.0);
    }
    ForestParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    params.min_leaf = 1;
    const ForestModel m = fit_forest(one_column(x), two_classes(y), params, 0);
    CHECK(accuracy(m.predict(one_column(x)), two_classes(y)) == 1.0);
    CHECK(m.trees().front().nodes().front().threshold == 0.0);
    CHECK(*m.predict(one_column({5.0})).values[0] == 1.0);
}

TEST_CASE("repeat fits are identical, serial and parallel agree")
{
    const auto [X, y] = testing::iris();
    ForestParams params;
    params.n_trees = 30;
    const ForestModel a = fit_forest(X, y, params, 99, Execution::Parallel);
    const ForestModel b = fit_forest(X, y, params, 99, Execution::Parallel);
    const ForestModel c = fit_forest(X, y, params, 99, Execution::Serial);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a.predict(X) == c.predict(X));
    CHECK_FALSE(a == fit_forest(X, y, params, 100));
    for (std::size_t t = 0; t < a.trees().size(); ++t) {
        CHECK(a.tree_seeds()[t] == tree_seed(99, t));
    }
}

TEST_CASE("iris training accuracy is high")
{
    const auto [X, y] = testing::iris();
    const ForestModel m = fit_forest(X, y, {}, 1);
    CHECK(accuracy(m.predict(X), y) > 0.97);
}

TEST_CASE("categorical splits")
{
    DataTable X({ColumnSchema::categorical("k", {"a", "b", "c", "d"})}, 40);
    std::vector<double> y;
    for (std::size_t r = 0; r < 40; ++r) {
        X.set(r, 0, static_cast<double>(r % 4));
        y.push_back((r % 4 == 1 || r % 4 == 3) ? 1.0 : 0.0);
    }
    ForestParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    const ForestModel m = fit_forest(X, two_classes(y), params, 0);
    CHECK(accuracy(m.predict(X), two_classes(y)) == 1.0);
    CHECK(m.trees().front().depth() == 1);
}

TEST_CASE("single-tree model predicts that tree's output")
{
    const Schema features{ColumnSchema::continuous("x")};
    const ForestModel m(ForestKind::Regression, features, {}, {DecisionTree({leaf(7.5)})}, {0});
    CHECK(*m.predict(one_column({1.0})).values[0] == 7.5);
}

TEST_CASE("vote ties go to the smallest class and regression averages")
{
    const Schema features{ColumnSchema::continuous("x")};
    const ForestModel cls(ForestKind::Classification, features, {"a", "b"},
                          {DecisionTree({leaf(1.0)}), DecisionTree({leaf(0.0)})}, {0, 1});
    CHECK(*cls.predict(one_column({0.0})).values[0] == 0.0);

    const ForestModel reg(ForestKind::Regression, features, {},
                          {DecisionTree({leaf(1.0)}), DecisionTree({leaf(3.0)})}, {0, 1});
    CHECK(*reg.predict(one_column({0.0})).values[0] == 2.0);
}

TEST_CASE("predict rejects missing cells and mismatched tables")
{
    const auto [X, y] = testing::iris();
    ForestParams params;
    params.n_trees = 5;
    const ForestModel m = fit_forest(X, y, params, 1);
    DataTable holey = X;
    for (std::size_t c = 0; c < 4; ++c) {
        holey.set_missing(0, c);
    }
    CHECK_THROWS(m.predict(holey));
    CHECK_THROWS_AS(m.predict(X.drop_column(0)), DataError);
    CHECK_THROWS(fit_forest(holey, y, params, 1));
}

TEST_CASE("missing-aware prediction")
{
    const auto [X, y] = testing::iris();
    ForestParams params;
    params.n_trees = 20;
    const ForestModel m = fit_forest(X, y, params, 4);
    CHECK(m.predict_with_missing(X) == m.predict(X));

    DataTable holey = X.select_rows(std::vector<std::size_t>{0, 1});
    for (std::size_t c = 0; c < 4; ++c) {
        holey.set_missing(0, c);
        holey.set_missing(1, c);
    }
    const LabelVector p = m.predict_with_missing(holey);
    CHECK(p.values[0] == p.values[1]);
    CHECK(m.predict_with_missing(holey) == p);

    // Follow majority directions by hand.
    std::vector<std::size_t> votes(3);
    for (const auto& tree : m.trees()) {
        const auto& nodes = tree.nodes();
        std::size_t i = 0;
        while (!nodes[i].is_leaf()) {
            i = static_cast<std::size_t>(nodes[i].majority == Direction::Left ? nodes[i].left : nodes[i].right);
        }
        ++votes[static_cast<std::size_t>(nodes[i].prediction)];
    }
    CHECK(*p.values[0] == static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
}

TEST_CASE("a feature no tree splits on does not affect missing-aware prediction")
{
    // Feature 1 is constant, so it can never produce a valid split.
    const auto [X, y] = testing::iris();
    DataTable X2 = column_stack(X.select_columns(std::vector<std::size_t>{2}), X.select_columns(std::vector<std::size_t>{0}));
    for (std::size_t r = 0; r < X2.n_rows(); ++r) {
        X2.set(r, 1, 1.0);
    }
    ForestParams params;
    params.n_trees = 10;
    const ForestModel m = fit_forest(X2, y, params, 8);
    for (const auto& tree : m.trees()) {
        CHECK_FALSE(tree.uses_feature(1));
    }
    DataTable holey = X2;
    for (std::size_t r = 0; r < holey.n_rows(); ++r) {
        holey.set_missing(r, 1);
    }
    CHECK(m.predict_with_missing(holey) == m.predict(X2));
}

TEST_CASE("fit on missing data")
{
    const auto [X, y] = testing::iris();
    ForestParams params;
    params.n_trees = 25;
    CHECK(fit_forest_on_missing(X, y, params, 6) == fit_forest(X, y, params, 6));

    const DataTable masked = apply_mcar(X, 0.5, 2).table;
    const ForestModel a = fit_forest_on_missing(masked, y, params, 6, Execution::Parallel);
    const ForestModel b = fit_forest_on_missing(masked, y, params, 6, Execution::Serial);
    CHECK(a == b);
    const LabelVector p = a.predict_with_missing(masked);
    CHECK(p.complete());
    CHECK(accuracy(p, y) > 0.8);
}

TEST_CASE("labels must be complete")
{
    const auto [X, y] = testing::iris();
    LabelVector holey = y;
    holey.values[3].reset();
    CHECK_THROWS_AS(fit_forest(X, holey, {}, 0), DataError);
}

TEST_CASE("parameter bounds")
{
    const auto [X, y] = testing::iris();
    ForestParams p;
    p.mtry = 5;
    CHECK_THROWS_AS(fit_forest(X, y, p, 0), UsageError);
    p.mtry = 0;
    CHECK_THROWS_AS(fit_forest(X, y, p, 0), UsageError);
    p = {};
    p.n_trees = 0;
    CHECK_THROWS_AS(fit_forest(X, y, p, 0), UsageError);
    p = {};
    p.min_leaf = 0;
    CHECK_THROWS_AS(fit_forest(X, y, p, 0), UsageError);
    CHECK_THROWS(fit_forest(X.select_rows(std::vector<std::size_t>{}), y.select(std::vector<std::size_t>{}), {}, 0));
}

TEST_CASE("regression predictions stay inside the target range")
{
    Rng rng(12);
    const DataTable X = testing::random_mixed_table(60, 5, rng);
    std::vector<std::optional<double>> t;
    for (std::size_t r = 0; r < 60; ++r) {
        t.push_back(rng.uniform(-3.0, 2.0));
    }
    const auto y = LabelVector::regression(t);
    ForestParams params;
    params.n_trees = 30;
    const ForestModel m = fit_forest(X, y, params, 2);
    const double lo = **std::min_element(t.begin(), t.end());
    const double hi = **std::max_element(t.begin(), t.end());
    const DataTable probe = apply_mcar(X, 0.0, 0).table;
    for (const auto& v : m.predict(probe).values) {
        CHECK(*v >= lo);
        CHECK(*v <= hi);
    }
    for (const auto& tree : m.trees()) {
        for (const auto& node : tree.nodes()) {
            if (node.is_leaf()) {
                CHECK(node.prediction >= lo);
                CHECK(node.prediction <= hi);
            }
        }
    }
}

TEST_CASE("classification predictions come from the training classes")
{
    const auto [X, y] = testing::iris();
    const std::vector<std::size_t> rows{0, 1, 2, 3, 50, 51, 52, 53};
    ForestParams params;
    params.n_trees = 15;
    const ForestModel m = fit_forest(X.select_rows(rows), y.select(rows), params, 3);
    for (const auto& v : m.predict(X).values) {
        CHECK((*v == 0.0 || *v == 1.0));
    }
}
