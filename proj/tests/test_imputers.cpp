#include "doctest.h"
#include "support.hpp"

#include "labelstack/error.hpp"
#include "labelstack/imputers.hpp"
#include "labelstack/preprocess.hpp"

#include <cmath>
#include <sstream>

using namespace labelstack;

namespace {

DataTable continuous_table(const std::vector<std::vector<std::optional<double>>>& cols)
{
    Schema schema;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        schema.push_back(ColumnSchema::continuous("c" + std::to_string(c)));
    }
    DataTable t(schema, cols.front().size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        for (std::size_t r = 0; r < cols[c].size(); ++r) {
            if (cols[c][r]) {
                t.set(r, c, *cols[c][r]);
            }
        }
    }
    return t;
}

MissForestParams small_forest(std::uint64_t seed)
{
    MissForestParams p;
    p.forest.n_trees = 20;
    p.seed = seed;
    return p;
}

void check_preserves(const DataTable& in, const DataTable& out)
{
    REQUIRE(out.complete());
    REQUIRE(out.schema() == in.schema());
    for (std::size_t c = 0; c < in.n_cols(); ++c) {
        for (std::size_t r = 0; r < in.n_rows(); ++r) {
            if (!in.is_missing(r, c)) {
                CHECK(out.value(r, c) == in.value(r, c));
            }
        }
    }
}

}  // namespace

TEST_CASE("init_impute uses the mean and the mode")
{
    const DataTable t = continuous_table({{1.0, std::nullopt, 3.0}});
    CHECK(init_impute(t).value(1, 0) == 2.0);

    DataTable k({ColumnSchema::categorical("k", {"a", "b"})}, 4);
    k.set(0, 0, 0.0);
    k.set(1, 0, 0.0);
    k.set(2, 0, 1.0);
    CHECK(init_impute(k).category(3, 0) == 0);

    DataTable tie({ColumnSchema::categorical("k", {"a", "b"})}, 3);
    tie.set(0, 0, 1.0);
    tie.set(1, 0, 0.0);
    CHECK(init_impute(tie).category(2, 0) == 0);

    const auto [X, y] = testing::iris();
    CHECK(init_impute(X) == X);
    CHECK_THROWS_AS(init_impute(continuous_table({{std::nullopt, std::nullopt}})), DataError);
}

TEST_CASE("column order is ascending missing count, ties by index")
{
    const DataTable t = continuous_table({{std::nullopt, std::nullopt, std::nullopt, 1.0},
                                          {1.0, 2.0, 3.0, 4.0},
                                          {std::nullopt, 2.0, 3.0, 4.0}});
    CHECK(order_columns_by_missing(t) == std::vector<std::size_t>{1, 2, 0});
    const DataTable even = continuous_table({{1.0}, {2.0}, {3.0}});
    CHECK(order_columns_by_missing(even) == std::vector<std::size_t>{0, 1, 2});
    CHECK(order_columns_by_missing(continuous_table({{1.0}})) == std::vector<std::size_t>{0});
}

TEST_CASE("continuous change statistic")
{
    const std::vector<std::size_t> F{0};
    const DataTable a = continuous_table({{1.0}});
    const DataTable b = continuous_table({{2.0}});
    CHECK(delta_continuous(a, a, F) == 0.0);
    CHECK(delta_continuous(b, a, F) == 0.25);

    Rng rng(2);
    DataTable x = continuous_table({{0.3, -1.2, 2.0}, {0.7, 0.1, 4.0}});
    DataTable y = continuous_table({{0.5, -1.0, 2.5}, {0.6, 0.4, 3.0}});
    const std::vector<std::size_t> both{0, 1};
    const double d = delta_continuous(y, x, both);
    DataTable xs = x;
    DataTable ys = y;
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t r = 0; r < 3; ++r) {
            xs.set(r, c, -3.5 * x.value(r, c));
            ys.set(r, c, -3.5 * y.value(r, c));
        }
    }
    CHECK(delta_continuous(ys, xs, both) == doctest::Approx(d).epsilon(1e-14));
    CHECK_THROWS_AS(delta_continuous(continuous_table({{0.0}}), a, F), DataError);
}

TEST_CASE("categorical change statistic")
{
    const Schema schema{ColumnSchema::categorical("k", {"a", "b"})};
    DataTable old_t(schema, 4);
    DataTable new_t(schema, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        old_t.set(r, 0, 0.0);
        new_t.set(r, 0, 0.0);
    }
    const MissingMask all({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, 4, 1);
    const std::vector<std::size_t> G{0};
    CHECK(delta_categorical(new_t, old_t, G, all) == 0.0);
    new_t.set(2, 0, 1.0);
    CHECK(delta_categorical(new_t, old_t, G, all) == 0.25);
    for (std::size_t r = 0; r < 4; ++r) {
        new_t.set(r, 0, 1.0);
    }
    CHECK(delta_categorical(new_t, old_t, G, all) == 1.0);
    CHECK_THROWS_AS(delta_categorical(new_t, old_t, G, MissingMask({}, 4, 1)), DataError);
}

TEST_CASE("missForest on a complete table is a no-op")
{
    const auto [X, y] = testing::iris();
    const MissForestResult res = missforest_impute(X, small_forest(1));
    CHECK(res.imputed == X);
    CHECK(res.trace.records.empty());
    CHECK(res.trace.stop == StopReason::NothingMissing);
}

TEST_CASE("missForest fills a constant column with its constant")
{
    Rng rng(4);
    std::vector<std::optional<double>> c0;
    std::vector<std::optional<double>> c1;
    for (int r = 0; r < 30; ++r) {
        c0.push_back(rng.uniform());
        c1.push_back(r % 5 == 0 ? std::nullopt : std::optional<double>(0.7));
    }
    const DataTable t = continuous_table({c0, c1});
    const MissForestResult res = missforest_impute(t, small_forest(2));
    for (std::size_t r = 0; r < 30; r += 5) {
        CHECK(res.imputed.value(r, 1) == 0.7);
    }
}

TEST_CASE("missForest on masked iris train")
{
    const auto [X, y] = testing::iris();
    const Split s = train_test_split(X, y, 0.6, 12);
    const DataTable masked = apply_mcar(s.train.X, 0.2, 13).table;
    const MissForestResult res = missforest_impute(masked, small_forest(14));
    check_preserves(masked, res.imputed);
    REQUIRE_FALSE(res.trace.records.empty());
    for (const auto& rec : res.trace.records) {
        REQUIRE(rec.delta_continuous.has_value());
        CHECK(std::isfinite(*rec.delta_continuous));
        CHECK(*rec.delta_continuous >= 0.0);
        CHECK_FALSE(rec.delta_categorical.has_value());
    }
    CHECK(res.trace.records.size() <= 10);
    if (res.trace.stop == StopReason::DeltaIncreased) {
        const auto& recs = res.trace.records;
        CHECK(*recs.back().delta_continuous > *recs[recs.size() - 2].delta_continuous);
        CHECK(res.trace.returned_iter == recs.size() - 1);
    } else {
        CHECK(res.trace.returned_iter == 10);
    }

    MissForestParams serial = small_forest(14);
    serial.exec = Execution::Serial;
    CHECK(missforest_impute(masked, serial).imputed == res.imputed);
    CHECK(missforest_impute(masked, small_forest(14)).imputed == res.imputed);
}

TEST_CASE("missForest handles categorical columns")
{
    Rng rng(21);
    const DataTable clean = testing::random_mixed_table(50, 6, rng);
    const MaskedTable m = apply_mcar(clean, 0.3, 22);
    const MissForestResult res = missforest_impute(m.table, small_forest(23));
    check_preserves(m.table, res.imputed);
    std::ostringstream trace;
    write_trace_csv(trace, res.trace);
    CHECK(trace.str().rfind("iter,delta_continuous,delta_categorical\n", 0) == 0);
}

TEST_CASE("max_iter bounds the sweeps")
{
    const auto [X, y] = testing::iris();
    const DataTable masked = apply_mcar(X, 0.3, 3).table;
    MissForestParams p = small_forest(3);
    p.max_iter = 1;
    const MissForestResult res = missforest_impute(masked, p);
    CHECK(res.trace.records.size() == 1);
    CHECK(res.trace.stop == StopReason::MaxIter);
    CHECK(res.trace.returned_iter == 1);
}

TEST_CASE("MICE no-op, constant column and exact collinear fill")
{
    const auto [X, y] = testing::iris();
    CHECK(mice_impute(X, {}) == X);

    const DataTable constant = continuous_table({{1.0, 2.0, 3.0, 4.0}, {5.0, std::nullopt, 5.0, std::nullopt}});
    const DataTable filled = mice_impute(constant, {});
    CHECK(filled.value(1, 1) == 5.0);
    CHECK(filled.value(3, 1) == 5.0);

    std::vector<std::optional<double>> x1;
    std::vector<std::optional<double>> x2;
    for (int r = 0; r < 12; ++r) {
        x1.push_back(0.25 * r - 1.0);
        x2.push_back(2.0 * (0.25 * r - 1.0));
    }
    x1[5].reset();
    const DataTable col = mice_impute(continuous_table({x1, x2}), {});
    CHECK(col.value(5, 0) == doctest::Approx(*x2[5] / 2.0).epsilon(1e-8));
    CHECK(std::abs(col.value(5, 0) - *x2[5] / 2.0) < 1e-8);
}

TEST_CASE("MICE on mixed tables")
{
    Rng rng(31);
    const DataTable clean = testing::random_mixed_table(40, 5, rng);
    const MaskedTable m = apply_mcar(clean, 0.4, 32);
    const DataTable out = mice_impute(m.table, {});
    check_preserves(m.table, out);
    CHECK(impute(m.table, ImputerChoice{MiceParams{}}) == out);
}
