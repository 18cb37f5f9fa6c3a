#include "doctest.h"
#include "support.hpp"

#include "labelstack/cli.hpp"
#include "labelstack/csv.hpp"

#include <sstream>

using namespace labelstack;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

std::string iris_path()
{
    return (testing::source_dir() / "data" / "iris.csv").string();
}

}  // namespace

TEST_CASE("help and usage errors")
{
    CHECK(cli({"--help"}).code == 0);
    const Run bad = cli({"--bogus-flag", "impute", "x.csv"});
    CHECK(bad.code == 1);
    CHECK_FALSE(bad.err.empty());
    CHECK(cli({}).code == 1);
    CHECK(cli({"impute", iris_path(), "--method", "knn"}).code == 1);
    CHECK(cli({"impute", iris_path(), "--strategy", "iul"}).code == 1);
}

TEST_CASE("missing inputs are data errors")
{
    CHECK(cli({"experiment", "/nonexistent/config.json"}).code == 2);
    CHECK(cli({"impute", "/nonexistent/in.csv"}).code == 2);
}

TEST_CASE("simulate then impute with labels")
{
    const auto dir = testing::scratch_dir("cli_impute");
    REQUIRE(cli({"--out-dir", dir.string(), "--seed", "4", "simulate", iris_path(), "--rate", "0.2"}).code == 0);
    const DataTable masked = load_csv(dir / "masked.csv");
    CHECK(masked.missing_count() == 150);
    CHECK(testing::line_count(testing::read_file(dir / "mask.csv")) == 151);

    const Run iul = cli({"--out-dir", dir.string(), "impute", (dir / "masked.csv").string(), "--method",
                         "missforest", "--strategy", "iul", "--label", "class", "--trees", "10", "--trace"});
    REQUIRE(iul.code == 0);
    const DataTable out = load_csv(dir / "imputed.csv");
    CHECK(out.complete());
    CHECK(out.schema() == masked.schema());
    CHECK(std::filesystem::exists(dir / "trace.csv"));

    const Run di = cli({"--out-dir", dir.string(), "impute", (dir / "masked.csv").string(), "--method", "mice",
                        "--label", "class", "--output", "di.csv"});
    REQUIRE(di.code == 0);
    const DataTable d = load_csv(dir / "di.csv", masked.schema());
    CHECK(d.missing_count() == masked.missing_count(4));
}

TEST_CASE("cbmi writes predictions")
{
    const auto dir = testing::scratch_dir("cli_cbmi");
    const DataTable iris = testing::iris_table();
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t r = 0; r < 150; ++r) {
        (r % 5 == 0 ? test : train).push_back(r);
    }
    save_csv(dir / "train.csv", iris.select_rows(train));
    save_csv(dir / "test.csv", iris.select_rows(test).drop_column(4));
    const Run r = cli({"--out-dir", dir.string(), "cbmi", (dir / "train.csv").string(),
                       (dir / "test.csv").string(), "--label", "class", "--trees", "10"});
    REQUIRE(r.code == 0);
    const DataTable pred = load_csv(dir / "predictions.csv");
    CHECK(pred.n_rows() == 30);
    CHECK(pred.column(1).name == "class");
}

TEST_CASE("theorem-check writes one row per instance and flags violations")
{
    const auto dir = testing::scratch_dir("cli_theorem");
    const Run r = cli({"--out-dir", dir.string(), "theorem-check", "--instances", "50", "--tol", "1e-8"});
    const std::string csv = testing::read_file(dir / "theorem_check.csv");
    CHECK(testing::line_count(csv) == 51);
    const DataTable t = parse_csv(csv);
    const std::size_t holds = column_index(t, "identity_holds");
    std::size_t violations = 0;
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
        violations += t.value(i, holds) == 0.0 ? 1 : 0;
    }
    CHECK(r.code == (violations == 0 ? 0 : 3));
    CHECK(cli({"theorem-check", "--n-min", "2"}).code == 1);
}

TEST_CASE("experiment subcommand writes the report")
{
    const auto dir = testing::scratch_dir("cli_experiment");
    const auto cfg = dir / "cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"dataset": ")" << iris_path()
            << R"(", "label": "class", "rates": [0.3], "repetitions": 2, "seed": 3,
                "methods": ["RF-missing"], "forest": {"n_trees": 5}})";
    }
    const Run r = cli({"--out-dir", (dir / "out").string(), "experiment", cfg.string(), "--format", "csv,json"});
    REQUIRE(r.code == 0);
    CHECK(testing::line_count(testing::read_file(dir / "out" / "runs.csv")) == 3);
    CHECK(std::filesystem::exists(dir / "out" / "report.json"));
    CHECK(cli({"experiment", cfg.string(), "--format", "xml"}).code == 1);
}
