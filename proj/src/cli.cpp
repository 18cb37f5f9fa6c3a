#include "labelstack/cli.hpp"

#include "labelstack/csv.hpp"
#include "labelstack/error.hpp"
#include "labelstack/harness.hpp"
#include "labelstack/parallel.hpp"
#include "labelstack/preprocess.hpp"
#include "labelstack/random.hpp"
#include "labelstack/strategies.hpp"
#include "labelstack/theory.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

namespace labelstack {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir = ".";
};

std::optional<Schema> maybe_schema(const std::string& path)
{
    if (path.empty()) {
        return std::nullopt;
    }
    return load_schema_json(path);
}

fs::path prepare_out_dir(const GlobalOptions& g)
{
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec) {
        throw DataError("cannot create '" + g.out_dir + "': " + ec.message());
    }
    return g.out_dir;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    return out;
}

/// Puts the last column back at position `at`.
DataTable move_last_column(const DataTable& t, std::size_t at)
{
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c + 1 < t.n_cols(); ++c) {
        if (c == at) {
            order.push_back(t.n_cols() - 1);
        }
        order.push_back(c);
    }
    if (order.size() < t.n_cols()) {
        order.push_back(t.n_cols() - 1);
    }
    return t.select_columns(order);
}

struct SimulateOptions {
    std::string input;
    std::string schema;
    double rate = 0.0;
};

int run_simulate(const SimulateOptions& o, const GlobalOptions& g, std::ostream& out)
{
    const DataTable table = load_csv(o.input, maybe_schema(o.schema));
    const MaskedTable masked = apply_mcar(table, o.rate, g.seed);
    const fs::path dir = prepare_out_dir(g);
    save_csv(dir / "masked.csv", masked.table);
    auto mask_out = open_out(dir / "mask.csv");
    mask_out << "row,col,column\n";
    for (const Cell& c : masked.mask.cells()) {
        mask_out << c.row << ',' << c.col << ',' << csv_escape(table.column(c.col).name) << '\n';
    }
    out << "masked " << masked.mask.size() << " of " << table.n_rows() * table.n_cols() << " cells\n";
    return 0;
}

struct ImputeOptions {
    std::string input;
    std::string schema;
    std::string method = "missforest";
    std::string strategy = "di";
    std::string label;
    std::size_t max_iter = 10;
    std::size_t n_trees = 100;
    std::string output;
    bool trace = false;
};

int run_impute(const ImputeOptions& o, const GlobalOptions& g, std::ostream& out)
{
    if (o.strategy == "iul" && o.label.empty()) {
        throw UsageError("--strategy iul needs --label");
    }
    const DataTable table = load_csv(o.input, maybe_schema(o.schema));

    MissForestParams mf;
    mf.forest.n_trees = o.n_trees;
    mf.max_iter = o.max_iter;
    mf.seed = g.seed;
    MiceParams mice;
    mice.n_iter = o.max_iter;
    mice.seed = g.seed;
    const bool use_forest = o.method == "missforest";

    std::optional<IterationTrace> trace;
    auto impute_table = [&](const DataTable& t) {
        if (use_forest) {
            MissForestResult res = missforest_impute(t, mf);
            trace = std::move(res.trace);
            return std::move(res.imputed);
        }
        return mice_impute(t, mice);
    };

    DataTable result;
    if (o.label.empty()) {
        result = impute_table(table);
    } else {
        const std::size_t lc = column_index(table, o.label);
        auto [X, y] = extract_label(table, o.label);
        if (o.strategy == "iul") {
            const DataTable stacked = stack_labels(X, y, o.label).table;
            result = move_last_column(impute_table(stacked), lc);
        } else {
            const DataTable label = table.select_columns(std::vector<std::size_t>{lc});
            result = move_last_column(column_stack(impute_table(X), label), lc);
        }
    }

    const fs::path dir = prepare_out_dir(g);
    const fs::path path = dir / (o.output.empty() ? "imputed.csv" : o.output);
    save_csv(path, result);
    if (o.trace && trace) {
        auto tout = open_out(dir / "trace.csv");
        write_trace_csv(tout, *trace);
    }
    out << "wrote " << path.string() << '\n';
    return 0;
}

struct CbmiOptions {
    std::string train;
    std::string test;
    std::string schema;
    std::string label;
    std::size_t max_iter = 10;
    std::size_t n_trees = 100;
};

int run_cbmi(const CbmiOptions& o, const GlobalOptions& g, std::ostream& out)
{
    const DataTable train = load_csv(o.train, maybe_schema(o.schema));
    const std::size_t lc = column_index(train, o.label);
    auto [X_train, y_train] = extract_label(train, o.label);

    // The test file may carry the label column (ignored) or omit it.
    const DataTable probe = load_csv(o.test);
    const bool has_label = std::any_of(probe.schema().begin(), probe.schema().end(),
                                       [&](const ColumnSchema& c) { return c.name == o.label; });
    const DataTable X_test = has_label ? extract_label(load_csv(o.test, train.schema()), o.label).first
                                       : load_csv(o.test, X_train.schema());

    MissForestParams mf;
    mf.forest.n_trees = o.n_trees;
    mf.max_iter = o.max_iter;
    mf.seed = g.seed;
    const CbmiResult res = cbmi_predict(X_train, y_train, X_test, mf);

    const fs::path dir = prepare_out_dir(g);
    auto pout = open_out(dir / "predictions.csv");
    pout << "row," << csv_escape(train.column(lc).name) << '\n';
    for (std::size_t r = 0; r < res.y_pred.size(); ++r) {
        const auto code = static_cast<std::size_t>(*res.y_pred.values[r]);
        pout << r << ',' << csv_escape(res.y_pred.classes[code]) << '\n';
    }
    out << "wrote " << (dir / "predictions.csv").string() << '\n';
    return 0;
}

struct ExperimentOptions {
    std::string config;
    std::vector<std::string> formats{"csv"};
};

int run_experiment_cmd(const ExperimentOptions& o, const GlobalOptions& g, bool seed_given, std::ostream& out)
{
    ExperimentConfig cfg = load_config(o.config);
    if (seed_given) {
        cfg.master_seed = g.seed;
    }
    std::vector<ReportFormat> formats;
    for (const auto& f : o.formats) {
        if (f == "csv") {
            formats.push_back(ReportFormat::Csv);
        } else if (f == "json") {
            formats.push_back(ReportFormat::Json);
        } else {
            throw UsageError("unknown format '" + f + "'");
        }
    }
    const ExperimentReport report = run_experiment(cfg);
    const auto written = emit_report(report, prepare_out_dir(g), formats);
    std::size_t failed = 0;
    for (const auto& r : report.records) {
        failed += r.ok() ? 0 : 1;
    }
    out << report.records.size() << " runs, " << failed << " failed\n";
    for (const auto& p : written) {
        out << "wrote " << p.string() << '\n';
    }
    return 0;
}

struct TheoremOptions {
    std::size_t instances = 1000;
    std::size_t n_min = 5;
    std::size_t n_max = 50;
    double tol = 1e-8;
};

int run_theorem_check(const TheoremOptions& o, const GlobalOptions& g, std::ostream& out)
{
    if (o.n_min < 3 || o.n_max < o.n_min) {
        throw UsageError("need 3 <= --n-min <= --n-max");
    }
    std::vector<theory::TheoremInstance> instances(o.instances);
    for (std::size_t i = 0; i < o.instances; ++i) {
        Rng rng(derive_seed(g.seed, {i}));
        const std::size_t n = o.n_min + static_cast<std::size_t>(rng.below(o.n_max - o.n_min + 1));
        instances[i] = theory::random_instance(n, rng);
    }
    const auto reports = theory::evaluate_batch(instances, o.tol, Execution::Parallel);
    const fs::path path = prepare_out_dir(g) / "theorem_check.csv";
    {
        auto csv = open_out(path);
        theory::write_theorem_csv(csv, reports);
    }
    std::size_t identity_fail = 0;
    std::size_t iff_fail = 0;
    for (const auto& r : reports) {
        identity_fail += r.identity_holds ? 0 : 1;
        iff_fail += r.iff_holds ? 0 : 1;
    }
    out << reports.size() << " instances, " << identity_fail << " identity violations, " << iff_fail
        << " iff violations\nwrote " << path.string() << '\n';
    if (identity_fail + iff_fail > 0) {
        throw InvariantViolation("theorem check failed on " +
                                 std::to_string(std::max(identity_fail, iff_fail)) + " instances");
    }
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Label-stacking imputation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--out-dir", g.out_dir, "Output directory");

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Apply MCAR masking to a complete CSV");
    simulate->add_option("input", sim.input, "Input CSV")->required();
    simulate->add_option("--rate", sim.rate, "Missing rate in [0, 1)")->required();
    simulate->add_option("--schema", sim.schema, "Schema JSON sidecar");

    ImputeOptions imp;
    auto* impute = app.add_subcommand("impute", "Impute one CSV");
    impute->add_option("input", imp.input, "Input CSV")->required();
    impute->add_option("--method", imp.method, "Imputer")->check(CLI::IsMember({"missforest", "mice"}));
    impute->add_option("--strategy", imp.strategy, "di or iul")->check(CLI::IsMember({"di", "iul"}));
    impute->add_option("--label", imp.label, "Label column");
    impute->add_option("--max-iter", imp.max_iter, "Maximum sweeps");
    impute->add_option("--trees", imp.n_trees, "Trees per forest");
    impute->add_option("--schema", imp.schema, "Schema JSON sidecar");
    impute->add_option("--output", imp.output, "Output file name inside --out-dir");
    impute->add_flag("--trace", imp.trace, "Also write the missForest trace");

    CbmiOptions cb;
    auto* cbmi = app.add_subcommand("cbmi", "Transductive classification of a test CSV");
    cbmi->add_option("train", cb.train, "Training CSV")->required();
    cbmi->add_option("test", cb.test, "Test CSV")->required();
    cbmi->add_option("--label", cb.label, "Label column")->required();
    cbmi->add_option("--max-iter", cb.max_iter, "Maximum sweeps");
    cbmi->add_option("--trees", cb.n_trees, "Trees per forest");
    cbmi->add_option("--schema", cb.schema, "Schema JSON sidecar for the training file");

    ExperimentOptions ex;
    auto* experiment = app.add_subcommand("experiment", "Run an experiment config");
    experiment->add_option("config", ex.config, "Config JSON")->required();
    experiment->add_option("--format", ex.formats, "csv and/or json")->delimiter(',');

    TheoremOptions th;
    auto* theorem = app.add_subcommand("theorem-check", "Check the SSE identity on random instances");
    theorem->add_option("--instances", th.instances, "Instance count");
    theorem->add_option("--n-min", th.n_min, "Smallest instance size");
    theorem->add_option("--n-max", th.n_max, "Largest instance size");
    theorem->add_option("--tol", th.tol, "Relative tolerance")->check(CLI::NonNegativeNumber);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        set_thread_count(g.threads);
        if (*simulate) {
            return run_simulate(sim, g, out);
        }
        if (*impute) {
            return run_impute(imp, g, out);
        }
        if (*cbmi) {
            return run_cbmi(cb, g, out);
        }
        if (*experiment) {
            return run_experiment_cmd(ex, g, seed_opt->count() > 0, out);
        }
        return run_theorem_check(th, g, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const std::logic_error& e) {
        err << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace labelstack
