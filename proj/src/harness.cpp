#include "labelstack/harness.hpp"

#include "labelstack/csv.hpp"
#include "labelstack/error.hpp"
#include "labelstack/parallel.hpp"
#include "labelstack/preprocess.hpp"
#include "labelstack/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace labelstack {

namespace {

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::Cbmi, "CBMI"},
    {Method::IclfMissForest, "IClf-missForest"},
    {Method::IclfMice, "IClf-MICE"},
    {Method::RfMissing, "RF-missing"},
    {Method::IulVsDiMissForest, "IUL-vs-DI-missForest"},
    {Method::IulVsDiMice, "IUL-vs-DI-MICE"},
};

}  // namespace

std::string_view method_name(Method m) noexcept
{
    for (const auto& [method, name] : kMethodNames) {
        if (method == m) {
            return name;
        }
    }
    return "?";
}

Method parse_method(std::string_view name)
{
    for (const auto& [method, n] : kMethodNames) {
        if (n == name) {
            return method;
        }
    }
    throw DataError("unknown method '" + std::string(name) + "'");
}

std::string_view scenario_name(Scenario s) noexcept
{
    return s == Scenario::TestObserved ? "test-observed" : "test-missing";
}

Scenario parse_scenario(std::string_view name)
{
    if (name == "test-observed" || name == "TestObserved") {
        return Scenario::TestObserved;
    }
    if (name == "test-missing" || name == "TestMissing") {
        return Scenario::TestMissing;
    }
    throw DataError("unknown scenario '" + std::string(name) + "'");
}

std::vector<double> default_rates(Scenario scenario)
{
    if (scenario == Scenario::TestObserved) {
        return {0.0, 0.2, 0.4, 0.6, 0.8};
    }
    return {0.2, 0.4, 0.6, 0.8};
}

void ExperimentConfig::validate() const
{
    if (repetitions < 1) {
        throw DataError("config: repetitions must be >= 1");
    }
    if (rates.empty()) {
        throw DataError("config: no missing rates");
    }
    for (double r : rates) {
        if (!(r >= 0.0 && r < 1.0)) {
            throw DataError("config: rates must lie in [0, 1)");
        }
    }
    if (methods.empty()) {
        throw DataError("config: no methods");
    }
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
        throw DataError("config: train_ratio must lie in (0, 1)");
    }
    if (label.empty()) {
        throw DataError("config: label column not set");
    }
}

ExperimentConfig parse_config_json(std::string_view text, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    try {
        const auto doc = nlohmann::json::parse(text);
        const auto resolve_path = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };
        cfg.dataset = resolve_path(doc.at("dataset").get<std::string>());
        if (doc.contains("schema")) {
            cfg.schema = resolve_path(doc.at("schema").get<std::string>());
        }
        cfg.dataset_name = doc.value("name", cfg.dataset.stem().string());
        cfg.label = doc.at("label").get<std::string>();
        cfg.scenario = parse_scenario(doc.value("scenario", std::string("test-missing")));
        cfg.rates = doc.contains("rates") ? doc.at("rates").get<std::vector<double>>()
                                          : default_rates(cfg.scenario);
        cfg.repetitions = doc.value("repetitions", std::size_t{10});
        cfg.master_seed = doc.value("seed", std::uint64_t{0});
        cfg.train_ratio = doc.value("train_ratio", 0.6);
        if (doc.contains("methods")) {
            for (const auto& m : doc.at("methods")) {
                cfg.methods.push_back(parse_method(m.get<std::string>()));
            }
        } else {
            for (const auto& [m, name] : kMethodNames) {
                cfg.methods.push_back(m);
            }
        }
        if (doc.contains("forest")) {
            const auto& f = doc.at("forest");
            cfg.forest.n_trees = f.value("n_trees", cfg.forest.n_trees);
            if (f.contains("mtry")) {
                cfg.forest.mtry = f.at("mtry").get<std::size_t>();
            }
            if (f.contains("min_leaf")) {
                cfg.forest.min_leaf = f.at("min_leaf").get<std::size_t>();
            }
            if (f.contains("max_depth")) {
                cfg.forest.max_depth = f.at("max_depth").get<std::size_t>();
            }
            cfg.forest.bootstrap = f.value("bootstrap", true);
        }
        if (doc.contains("missforest")) {
            cfg.max_iter = doc.at("missforest").value("max_iter", cfg.max_iter);
        }
        if (doc.contains("mice")) {
            cfg.mice.n_iter = doc.at("mice").value("n_iter", cfg.mice.n_iter);
            cfg.mice.ridge = doc.at("mice").value("ridge", cfg.mice.ridge);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str(), path.parent_path());
}

std::uint64_t repetition_seed(std::uint64_t master, std::size_t repetition) noexcept
{
    return derive_seed(master, {0x726570ULL, repetition});
}

std::string format_report_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace {

/// Snap to the printed precision so CSV and JSON carry the same numbers.
double report_value(double v)
{
    return std::stod(format_report_number(v));
}

struct CellInputs {
    DataTable train_x;       // masked, scaled
    DataTable train_x_full;  // unmasked, scaled
    MissingMask train_mask;
    LabelVector train_y;
    DataTable test_x;  // masked (TestMissing) or observed, scaled
    LabelVector test_y;
};

LabelVector scale_labels(const LabelVector& y, const ColumnRange& range)
{
    LabelVector out = y;
    for (auto& v : out.values) {
        if (v) {
            *v = scale_value(*v, range);
        }
    }
    return out;
}

ColumnRange label_range(const LabelVector& y)
{
    ColumnRange r{*y.values.front(), *y.values.front()};
    for (const auto& v : y.values) {
        r.min = std::min(r.min, *v);
        r.max = std::max(r.max, *v);
    }
    return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct MethodRunner {
    const ExperimentConfig& cfg;
    const CellInputs& in;
    std::uint64_t imputer_seed;
    std::uint64_t classifier_seed;

    MissForestParams missforest() const { return {cfg.forest, cfg.max_iter, imputer_seed, Execution::Parallel}; }
    MiceParams mice() const
    {
        MiceParams p = cfg.mice;
        p.seed = imputer_seed;
        return p;
    }
    bool classification() const { return in.train_y.kind == LabelKind::ClassLabel; }

    void require_classification(Method m) const
    {
        if (!classification()) {
            throw DataError(std::string(method_name(m)) + " needs a class label");
        }
    }

    /// Test input as a downstream model sees it: imputed jointly with the
    /// raw training input when it has missing cells.
    DataTable downstream_test(const ImputerChoice& imputer) const
    {
        if (in.test_x.complete()) {
            return in.test_x;
        }
        const DataTable merged = di_impute(row_stack(in.train_x, in.test_x), imputer);
        std::vector<std::size_t> rows(in.test_x.n_rows());
        std::iota(rows.begin(), rows.end(), in.train_x.n_rows());
        return merged.select_rows(rows);
    }

    void score_downstream(RunRecord& rec, const DataTable& train_imp, const DataTable& test_in) const
    {
        const ForestModel model = fit_forest(train_imp, in.train_y, cfg.forest, classifier_seed);
        const LabelVector pred = model.predict(test_in);
        if (classification()) {
            rec.accuracy = accuracy(pred, in.test_y);
        } else {
            rec.downstream_mse = label_mse(pred, in.test_y);
        }
    }

    /// Runs one configured method; IUL-vs-DI methods yield two records.
    std::vector<RunRecord> run(Method m, const RunRecord& proto) const
    {
        using clock = std::chrono::steady_clock;
        std::vector<RunRecord> out;
        auto record = [&](std::string_view name) {
            RunRecord r = proto;
            r.method = std::string(name);
            return r;
        };

        switch (m) {
        case Method::Cbmi: {
            RunRecord r = record(method_name(m));
            require_classification(m);
            const auto t0 = clock::now();
            const CbmiResult res = cbmi_predict(in.train_x, in.train_y, in.test_x, missforest());
            r.wall_time_seconds = seconds_since(t0);
            r.accuracy = accuracy(res.y_pred, in.test_y);
            out.push_back(std::move(r));
            break;
        }
        case Method::IclfMissForest:
        case Method::IclfMice: {
            RunRecord r = record(method_name(m));
            require_classification(m);
            const ImputerChoice imp = m == Method::IclfMissForest ? ImputerChoice{missforest()} : ImputerChoice{mice()};
            const auto t0 = clock::now();
            const LabelVector pred =
                iclf_predict(in.train_x, in.train_y, in.test_x, imp, cfg.forest, classifier_seed, cfg.scenario);
            r.wall_time_seconds = seconds_since(t0);
            r.accuracy = accuracy(pred, in.test_y);
            out.push_back(std::move(r));
            break;
        }
        case Method::RfMissing: {
            RunRecord r = record(method_name(m));
            require_classification(m);
            const auto t0 = clock::now();
            const LabelVector pred = rf_missing_predict(in.train_x, in.train_y, in.test_x, cfg.forest, classifier_seed);
            r.wall_time_seconds = seconds_since(t0);
            r.accuracy = accuracy(pred, in.test_y);
            out.push_back(std::move(r));
            break;
        }
        case Method::IulVsDiMissForest:
        case Method::IulVsDiMice: {
            const bool forest = m == Method::IulVsDiMissForest;
            const ImputerChoice imp = forest ? ImputerChoice{missforest()} : ImputerChoice{mice()};
            const std::string suffix = forest ? "missForest" : "MICE";
            const DataTable test_in = downstream_test(imp);

            RunRecord iul = record("IUL-" + suffix);
            auto t0 = clock::now();
            const Unstacked iul_out = iul_impute(in.train_x, in.train_y, imp);
            iul.wall_time_seconds = seconds_since(t0);
            iul.masked_mse = masked_mse(iul_out.X, in.train_x_full, in.train_mask).mse;
            score_downstream(iul, iul_out.X, test_in);

            RunRecord di = record("DI-" + suffix);
            t0 = clock::now();
            const DataTable di_out = di_impute(in.train_x, imp);
            di.wall_time_seconds = seconds_since(t0);
            di.masked_mse = masked_mse(di_out, in.train_x_full, in.train_mask).mse;
            score_downstream(di, di_out, test_in);

            out.push_back(std::move(iul));
            out.push_back(std::move(di));
            break;
        }
        }
        return out;
    }
};

/// Record names a method produces, for failure records.
std::vector<std::string> output_names(Method m)
{
    switch (m) {
    case Method::IulVsDiMissForest:
        return {"IUL-missForest", "DI-missForest"};
    case Method::IulVsDiMice:
        return {"IUL-MICE", "DI-MICE"};
    default:
        return {std::string(method_name(m))};
    }
}

/// Per-rate random stream id, keyed by the rate itself so a cell's draws do
/// not depend on which other rates the config lists.
std::uint64_t rate_stream(double rate)
{
    return static_cast<std::uint64_t>(std::llround(rate * 1e6));
}

std::vector<RunRecord> run_repetition(const ExperimentConfig& cfg, const DataTable& X, const LabelVector& y,
                                      std::size_t rep)
{
    std::vector<RunRecord> out;
    const std::uint64_t seed = repetition_seed(cfg.master_seed, rep);
    const Split split = train_test_split(X, y, cfg.train_ratio, derive_seed(seed, {1}));

    for (std::size_t k = 0; k < cfg.rates.size(); ++k) {
        const double rate = cfg.rates[k];
        const std::uint64_t stream = rate_stream(rate);
        RunRecord proto;
        proto.dataset = cfg.dataset_name;
        proto.scenario = cfg.scenario;
        proto.rate = rate;
        proto.repetition = rep;
        proto.seed = seed;

        std::optional<CellInputs> in;
        std::string setup_error;
        try {
            MaskedTable train = apply_mcar(split.train.X, rate, derive_seed(seed, {2, stream}));
            MaskedTable test = cfg.scenario == Scenario::TestMissing
                                   ? apply_mcar(split.test.X, rate, derive_seed(seed, {3, stream}))
                                   : MaskedTable{split.test.X, {}};
            ScaledTables scaled = scale_minmax(train.table, {train.table, split.train.X, test.table});
            LabelVector ytr = split.train.y;
            LabelVector yte = split.test.y;
            if (y.kind == LabelKind::RegressionTarget) {
                const ColumnRange range = label_range(ytr);
                ytr = scale_labels(ytr, range);
                yte = scale_labels(yte, range);
            }
            in = CellInputs{std::move(scaled.tables[0]), std::move(scaled.tables[1]), std::move(train.mask),
                            std::move(ytr), std::move(scaled.tables[2]), std::move(yte)};
        } catch (const std::exception& e) {
            setup_error = e.what();
        }

        const MethodRunner runner{cfg, *in, derive_seed(seed, {5, stream}), derive_seed(seed, {6, stream})};
        for (Method m : cfg.methods) {
            try {
                if (!in) {
                    throw DataError(setup_error);
                }
                auto recs = runner.run(m, proto);
                out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
            } catch (const std::exception& e) {
                for (const auto& name : output_names(m)) {
                    RunRecord r = proto;
                    r.method = name;
                    r.error = e.what();
                    out.push_back(std::move(r));
                }
            }
        }
    }
    return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, Execution exec)
{
    config.validate();
    const std::optional<Schema> schema =
        config.schema ? std::optional<Schema>(load_schema_json(*config.schema)) : std::nullopt;
    const DataTable table = load_csv(config.dataset, schema);
    auto [X, y] = extract_label(table, config.label);
    if (!y.complete()) {
        throw DataError("dataset has missing labels in column '" + config.label + "'");
    }
    if (!X.complete()) {
        throw DataError("dataset already has missing input cells; MCAR simulation needs complete data");
    }

    std::vector<std::vector<RunRecord>> per_rep(config.repetitions);
    for_each_index(config.repetitions, exec,
                   [&](std::size_t rep) { per_rep[rep] = run_repetition(config, X, y, rep); });

    // Merge ordered by (method, rate, repetition); method order is the order
    // of first appearance, which follows the config.
    std::vector<std::string> method_order;
    for (const auto& rec : per_rep.front()) {
        if (std::find(method_order.begin(), method_order.end(), rec.method) == method_order.end()) {
            method_order.push_back(rec.method);
        }
    }
    ExperimentReport report;
    for (const auto& name : method_order) {
        for (std::size_t k = 0; k < config.rates.size(); ++k) {
            for (const auto& recs : per_rep) {
                for (const auto& rec : recs) {
                    if (rec.method == name && rec.rate == config.rates[k]) {
                        report.records.push_back(rec);
                    }
                }
            }
        }
    }
    report.aggregates = aggregate(report.records);
    return report;
}

Summary summarize(const std::vector<double>& values)
{
    Summary s;
    s.n = values.size();
    if (values.empty()) {
        return s;
    }
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    s.mean = mean;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::vector<Aggregate> aggregate(const std::vector<RunRecord>& records)
{
    std::vector<Aggregate> out;
    auto find = [&](const RunRecord& r) -> Aggregate& {
        for (auto& a : out) {
            if (a.method == r.method && a.rate == r.rate) {
                return a;
            }
        }
        out.push_back(Aggregate{r.method, r.rate, 0, 0, {}, {}, {}, {}});
        return out.back();
    };
    std::map<std::pair<std::string, double>, std::array<std::vector<double>, 4>> values;
    for (const auto& r : records) {
        Aggregate& a = find(r);
        ++a.runs;
        if (!r.ok()) {
            ++a.failed;
            continue;
        }
        auto& v = values[{r.method, r.rate}];
        if (r.accuracy) {
            v[0].push_back(*r.accuracy);
        }
        if (r.masked_mse) {
            v[1].push_back(*r.masked_mse);
        }
        if (r.downstream_mse) {
            v[2].push_back(*r.downstream_mse);
        }
        v[3].push_back(r.wall_time_seconds);
    }
    for (auto& a : out) {
        auto& v = values[{a.method, a.rate}];
        a.accuracy = summarize(v[0]);
        a.masked_mse = summarize(v[1]);
        a.downstream_mse = summarize(v[2]);
        a.wall_time = summarize(v[3]);
    }
    return out;
}

namespace {

std::string opt_num(const std::optional<double>& v)
{
    return v ? format_report_number(*v) : "NA";
}

nlohmann::json opt_json(const std::optional<double>& v)
{
    return v ? nlohmann::json(report_value(*v)) : nlohmann::json(nullptr);
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    out << content;
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                               const std::filesystem::path& out_dir,
                                               const std::vector<ReportFormat>& formats)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw DataError("cannot create '" + out_dir.string() + "': " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    const bool csv = std::find(formats.begin(), formats.end(), ReportFormat::Csv) != formats.end();
    const bool json = std::find(formats.begin(), formats.end(), ReportFormat::Json) != formats.end();

    if (csv) {
        std::ostringstream runs;
        runs << "dataset,method,scenario,rate,repetition,seed,masked_mse,accuracy,downstream_mse,status\n";
        std::ostringstream timings;
        timings << "dataset,method,scenario,rate,repetition,wall_time_seconds\n";
        for (const auto& r : report.records) {
            runs << csv_escape(r.dataset) << ',' << csv_escape(r.method) << ',' << scenario_name(r.scenario) << ','
                 << format_report_number(r.rate) << ',' << r.repetition << ',' << r.seed << ','
                 << opt_num(r.masked_mse) << ',' << opt_num(r.accuracy) << ',' << opt_num(r.downstream_mse) << ','
                 << csv_escape(r.ok() ? "ok" : "failed: " + r.error) << '\n';
            timings << csv_escape(r.dataset) << ',' << csv_escape(r.method) << ',' << scenario_name(r.scenario)
                    << ',' << format_report_number(r.rate) << ',' << r.repetition << ','
                    << format_report_number(r.wall_time_seconds) << '\n';
        }
        std::ostringstream agg;
        agg << "method,rate,runs,failed,accuracy_mean,accuracy_sd,masked_mse_mean,masked_mse_sd,"
               "downstream_mse_mean,downstream_mse_sd,wall_time_mean,wall_time_sd\n";
        std::ostringstream curves;
        curves << "method,rate,metric,mean,sd,n\n";
        for (const auto& a : report.aggregates) {
            agg << csv_escape(a.method) << ',' << format_report_number(a.rate) << ',' << a.runs << ',' << a.failed
                << ',' << opt_num(a.accuracy.mean) << ',' << opt_num(a.accuracy.sd) << ','
                << opt_num(a.masked_mse.mean) << ',' << opt_num(a.masked_mse.sd) << ','
                << opt_num(a.downstream_mse.mean) << ',' << opt_num(a.downstream_mse.sd) << ','
                << opt_num(a.wall_time.mean) << ',' << opt_num(a.wall_time.sd) << '\n';
            for (const auto& [metric, s] : {std::pair<const char*, const Summary*>{"accuracy", &a.accuracy},
                                            {"masked_mse", &a.masked_mse},
                                            {"downstream_mse", &a.downstream_mse}}) {
                if (s->mean) {
                    curves << csv_escape(a.method) << ',' << format_report_number(a.rate) << ',' << metric << ','
                           << opt_num(s->mean) << ',' << opt_num(s->sd) << ',' << s->n << '\n';
                }
            }
        }
        for (const auto& [name, body] : {std::pair<const char*, std::string>{"runs.csv", runs.str()},
                                         {"timings.csv", timings.str()},
                                         {"aggregates.csv", agg.str()},
                                         {"curves.csv", curves.str()}}) {
            write_file(out_dir / name, body);
            written.push_back(out_dir / name);
        }
    }

    if (json) {
        nlohmann::json doc;
        auto& runs = doc["runs"] = nlohmann::json::array();
        for (const auto& r : report.records) {
            runs.push_back({{"dataset", r.dataset},
                            {"method", r.method},
                            {"scenario", scenario_name(r.scenario)},
                            {"rate", report_value(r.rate)},
                            {"repetition", r.repetition},
                            {"seed", r.seed},
                            {"masked_mse", opt_json(r.masked_mse)},
                            {"accuracy", opt_json(r.accuracy)},
                            {"downstream_mse", opt_json(r.downstream_mse)},
                            {"wall_time_seconds", report_value(r.wall_time_seconds)},
                            {"status", r.ok() ? "ok" : "failed: " + r.error}});
        }
        auto& aggs = doc["aggregates"] = nlohmann::json::array();
        for (const auto& a : report.aggregates) {
            auto summary = [](const Summary& s) {
                return nlohmann::json{{"n", s.n}, {"mean", opt_json(s.mean)}, {"sd", opt_json(s.sd)}};
            };
            aggs.push_back({{"method", a.method},
                            {"rate", report_value(a.rate)},
                            {"runs", a.runs},
                            {"failed", a.failed},
                            {"accuracy", summary(a.accuracy)},
                            {"masked_mse", summary(a.masked_mse)},
                            {"downstream_mse", summary(a.downstream_mse)},
                            {"wall_time", summary(a.wall_time)}});
        }
        write_file(out_dir / "report.json", doc.dump(2) + "\n");
        written.push_back(out_dir / "report.json");
    }
    return written;
}

}  // namespace labelstack
