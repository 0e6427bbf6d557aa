#include "dstsr/cli.hpp"

#include "dstsr/csv.hpp"
#include "dstsr/dataset.hpp"
#include "dstsr/models.hpp"
#include "dstsr/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace dstsr::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where)
{
    if (!obj.is_object()) {
        throw ConfigError(where + " must be a JSON object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!ok.count(key)) {
            throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + where + "." + key + "': " + e.what());
    }
}

TimeRange parse_range(const json& obj, const std::string& where)
{
    check_keys(obj, {"start", "end"}, where);
    try {
        return TimeRange::parse(get<std::string>(obj, "start", where), get<std::string>(obj, "end", where));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::pair<double, double> parse_pair(const json& v, const std::string& where)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError(where + " must be a two-number array");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

void parse_operators(const json& v, OperatorSet& ops)
{
    if (!v.is_array()) throw ConfigError("search.operators must be an array of names");
    ops.unary.clear();
    ops.binary.clear();
    for (const auto& item : v) {
        const auto s = item.get<std::string>();
        bool found = false;
        for (std::size_t k = 0; k < kUnaryOpCount && !found; ++k) {
            if (name(static_cast<UnaryOp>(k)) == s) {
                ops.unary.push_back(static_cast<UnaryOp>(k));
                found = true;
            }
        }
        for (std::size_t k = 0; k < kBinaryOpCount && !found; ++k) {
            if (name(static_cast<BinaryOp>(k)) == s) {
                ops.binary.push_back(static_cast<BinaryOp>(k));
                found = true;
            }
        }
        if (!found) throw ConfigError("unknown operator '" + s + "'");
    }
}

void parse_features(const json& v, std::vector<Variable>& features)
{
    if (!v.is_array()) throw ConfigError("search.features must be an array of names");
    features.clear();
    for (const auto& item : v) {
        const auto s = item.get<std::string>();
        bool found = false;
        for (auto var : kAllVariables) {
            if (name(var) == s) {
                features.push_back(var);
                found = true;
            }
        }
        if (!found) throw ConfigError("unknown feature '" + s + "'");
    }
}

void parse_search(const json& obj, Config& cfg)
{
    const std::string w = "search";
    check_keys(obj,
               {"n_runs", "iterations", "max_complexity", "seed", "population_count", "tournament_size",
                "parsimony_range", "population_size_range", "constant_rounds", "crossover_probability",
                "max_train_rows", "constant_range", "operators", "features"},
               w);
    auto& s = cfg.search;
    if (obj.contains("n_runs")) cfg.n_runs = get<std::size_t>(obj, "n_runs", w);
    if (obj.contains("iterations")) s.iterations = get<std::size_t>(obj, "iterations", w);
    if (obj.contains("max_complexity")) s.max_complexity = get<int>(obj, "max_complexity", w);
    if (obj.contains("seed")) s.seed = get<std::uint64_t>(obj, "seed", w);
    if (obj.contains("population_count")) s.population_count = get<std::size_t>(obj, "population_count", w);
    if (obj.contains("tournament_size")) s.tournament_size = get<std::size_t>(obj, "tournament_size", w);
    if (obj.contains("constant_rounds")) s.constant_rounds = get<std::size_t>(obj, "constant_rounds", w);
    if (obj.contains("crossover_probability")) {
        s.crossover_probability = get<double>(obj, "crossover_probability", w);
    }
    if (obj.contains("max_train_rows")) s.max_train_rows = get<std::size_t>(obj, "max_train_rows", w);
    if (obj.contains("parsimony_range")) {
        std::tie(cfg.sampling.parsimony_min, cfg.sampling.parsimony_max) =
            parse_pair(obj["parsimony_range"], w + ".parsimony_range");
    }
    if (obj.contains("population_size_range")) {
        const auto [lo, hi] = parse_pair(obj["population_size_range"], w + ".population_size_range");
        cfg.sampling.population_size_min = static_cast<std::size_t>(lo);
        cfg.sampling.population_size_max = static_cast<std::size_t>(hi);
    }
    if (obj.contains("constant_range")) {
        std::tie(s.constant_min, s.constant_max) = parse_pair(obj["constant_range"], w + ".constant_range");
    }
    if (obj.contains("operators")) parse_operators(obj["operators"], s.operators);
    if (obj.contains("features")) parse_features(obj["features"], s.features);
}

void parse_storms(const json& arr, Config& cfg)
{
    if (!arr.is_array()) throw ConfigError("storms must be an array");
    for (const auto& item : arr) {
        check_keys(item, {"name", "start", "hours"}, "storms[]");
        const auto name = get<std::string>(item, "name", "storms[]");
        const std::size_t hours = item.contains("hours") ? get<std::size_t>(item, "hours", "storms[]") : kStormHours;
        if (hours != kStormHours) {
            throw ConfigError("storm '" + name + "': windows must be 72 hours");
        }
        Timestamp start;
        try {
            start = parse_timestamp(get<std::string>(item, "start", "storms[]"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("storm '" + name + "': " + e.what());
        }
        StormEvent ev{name, TimeRange(start, start + Hours{kStormHours}), std::nullopt};
        auto it = std::find_if(cfg.storms.begin(), cfg.storms.end(), [&](const StormEvent& e) { return e.name == name; });
        if (it != cfg.storms.end()) {
            *it = ev;
        } else {
            cfg.storms.push_back(ev);
        }
    }
}

/// Files are staged in memory and written together; on any failure nothing
/// new is left behind.
class Outputs {
public:
    void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

    void commit()
    {
        std::vector<fs::path> written;
        try {
            for (const auto& [path, content] : files_) {
                if (path.has_parent_path()) fs::create_directories(path.parent_path());
                const fs::path tmp = path.string() + ".tmp";
                {
                    std::ofstream out(tmp, std::ios::binary);
                    out << content;
                    if (!out) throw std::runtime_error("cannot write " + path.string());
                }
                fs::rename(tmp, path);
                written.push_back(path);
            }
        } catch (...) {
            std::error_code ec;
            for (const auto& p : written) fs::remove(p, ec);
            for (const auto& [path, content] : files_) fs::remove(path.string() + ".tmp", ec);
            throw;
        }
    }

private:
    std::vector<std::pair<fs::path, std::string>> files_;
};

std::string fixed(double v, int digits = 3)
{
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string safe_filename(std::string s)
{
    for (auto& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return s;
}

std::vector<ModelSpec> load_models(const std::string& which)
{
    if (which.empty() || which == "catalog") {
        return catalog();
    }
    std::ifstream in(which);
    if (!in) throw DataError(0, "cannot open models file " + which);
    std::vector<ModelSpec> models;
    for (const auto& row : read_candidates_csv(in)) {
        models.emplace_back("cand-" + std::to_string(row.rank), parse(row.equation), row.complexity);
    }
    if (models.empty()) throw DataError(0, "models file " + which + " lists no candidates");
    return models;
}

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs, iterations, horizon, count, threads;
    std::string models = "catalog";
    std::string out_dir = ".";

    Config resolve() const
    {
        Config cfg = config_path.empty() ? Config{} : load_config(config_path);
        if (seed) {
            cfg.search.seed = *seed;
            cfg.benchmark.seed = *seed;
        }
        if (runs) cfg.n_runs = *runs;
        if (iterations) cfg.search.iterations = *iterations;
        if (horizon) cfg.benchmark.horizon = *horizon;
        if (count) cfg.benchmark.count = *count;
        if (threads) cfg.threads = *threads;
        cfg.search.threads = cfg.threads;
        cfg.benchmark.threads = cfg.threads;
        return cfg;
    }
};

fs::path derived_path(const std::string& positional, const Config& cfg)
{
    if (!positional.empty()) return positional;
    if (cfg.derived_csv) return *cfg.derived_csv;
    throw ConfigError("no derived CSV given (argument or config key derived_csv)");
}

int cmd_ingest(const std::string& input_arg, const std::string& output_arg, const Common& common,
               std::ostream& out)
{
    const Config cfg = common.resolve();
    fs::path input = input_arg.empty() ? cfg.input_csv.value_or("") : fs::path(input_arg);
    fs::path output = output_arg.empty() ? cfg.derived_csv.value_or("") : fs::path(output_arg);
    if (input.empty() || output.empty()) throw ConfigError("ingest needs an input and an output path");

    const auto raw = load_csv(input);
    RepairStats stats;
    const auto repaired = repair_gaps(raw, &stats);
    const auto derived = derive(repaired);

    std::ostringstream csv_text;
    write_derived_csv(csv_text, derived);
    Outputs outputs;
    outputs.add(output, csv_text.str());
    outputs.commit();

    out << "rows read: " << raw.size() << "\n"
        << "hours inserted for time gaps: " << stats.inserted_rows << "\n";
    const char* names[] = {"Vsw", "Bz_gsm", "n_sw", "B_mag", "T_sw", "Dst"};
    for (std::size_t f = 0; f < kRawFieldCount; ++f) {
        out << "filled " << names[f] << ": " << stats.filled[f] << "\n";
    }
    out << "derived rows written: " << derived.size() << " -> " << output.string() << "\n";
    return 0;
}

int cmd_discover(const std::string& derived_arg, const Common& common, std::ostream& out)
{
    const Config cfg = common.resolve();
    const auto series = load_derived_csv(derived_path(derived_arg, cfg));
    const auto fit = slice(series, cfg.fit_range);
    const TrainingData train(fit, cfg.search.features, cfg.search.max_train_rows, cfg.search.seed);
    if (train.size() == 0) {
        throw DataError(0, "fit span " + format_timestamp(cfg.fit_range.start()) + " .. " +
                               format_timestamp(cfg.fit_range.end()) + " has no usable rows");
    }
    out << "fit rows: " << fit.size() << " (training on " << train.size() << ")\n"
        << "runs: " << cfg.n_runs << ", iterations: " << cfg.search.iterations
        << ", populations per run: " << cfg.search.population_count << "\n";

    const auto ensemble = multi_run(cfg.search, cfg.n_runs, train, cfg.sampling);
    const auto ranked = consolidate(ensemble, cfg.search.max_complexity);

    std::ostringstream text;
    write_candidates_csv(text, ranked);
    const fs::path path = fs::path(common.out_dir) / "candidates.csv";
    Outputs outputs;
    outputs.add(path, text.str());
    outputs.commit();

    out << "candidates: " << ranked.size() << " -> " << path.string() << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(ranked.size(), 10); ++i) {
        out << std::setw(3) << i + 1 << "  loss " << fixed(ranked[i].candidate.loss, 6) << "  C"
            << ranked[i].candidate.complexity << "  " << ranked[i].equation << "\n";
    }
    return 0;
}

int cmd_benchmark(const std::string& derived_arg, const Common& common, std::ostream& out,
                  std::ostream& err)
{
    const Config cfg = common.resolve();
    const auto series = load_derived_csv(derived_path(derived_arg, cfg));
    const auto holdout = slice(series, cfg.holdout_range);
    if (holdout.size() <= cfg.benchmark.horizon) {
        throw DataError(0, "holdout span has too few rows for a " +
                               std::to_string(cfg.benchmark.horizon) + " h horizon");
    }
    const auto models = load_models(common.models);
    const auto report = benchmark(models, holdout, cfg.benchmark);
    if (report.shortfall) {
        err << "warning: only " << report.window_starts.size() << " valid windows (requested "
            << report.requested_windows << ")\n";
    }

    std::ostringstream text;
    write_report_csv(text, report);
    const fs::path path = fs::path(common.out_dir) / "report.csv";
    Outputs outputs;
    outputs.add(path, text.str());
    outputs.commit();

    out << "windows: " << report.window_starts.size() << ", horizon: " << cfg.benchmark.horizon
        << " h, models: " << models.size() << " -> " << path.string() << "\n";
    for (auto metric : {Metric::Rmse, Metric::Mae}) {
        out << "top-5 by " << (metric == Metric::Rmse ? "RMSE" : "MAE") << ":";
        for (const auto& n : rank(report, metric, 5)) {
            const auto& r = report.row(n);
            out << "  " << n << " (" << fixed(metric == Metric::Rmse ? r.mean_rmse : r.mean_mae) << ")";
        }
        out << "\n";
    }
    return 0;
}

int cmd_storm(const std::string& derived_arg, const std::string& event_name, const std::string& range,
              const Common& common, std::ostream& out, std::ostream& err)
{
    const Config cfg = common.resolve();
    StormEvent event{"", TimeRange::parse("2000-01-01", "2000-01-04"), std::nullopt};
    if (!range.empty()) {
        const auto comma = range.find(',');
        if (comma == std::string::npos) throw ConfigError("--range expects START,END");
        event.window = TimeRange::parse(range.substr(0, comma), range.substr(comma + 1));
        event.name = event_name.empty() ? "custom-" + format_timestamp(event.window.start()).substr(0, 13)
                                        : event_name;
        if (event.window.duration() != Hours{kStormHours}) {
            throw ConfigError("--range must span exactly 72 hours");
        }
    } else {
        auto it = std::find_if(cfg.storms.begin(), cfg.storms.end(),
                               [&](const StormEvent& e) { return e.name == event_name; });
        if (it == cfg.storms.end()) {
            err << "error: unknown storm event '" << event_name << "'; known events:";
            for (const auto& e : cfg.storms) err << " " << e.name;
            err << "\n";
            return 1;
        }
        event = *it;
    }

    const auto series = load_derived_csv(derived_path(derived_arg, cfg));
    const auto models = load_models(common.models);
    const auto report = storm_eval(models, event, series, cfg.fit_range);

    std::ostringstream csv_text, metrics_text;
    write_storm_csv(csv_text, report);
    write_storm_metrics_csv(metrics_text, report);

    std::vector<svg::Line> lines{{"actual", report.actual}};
    std::vector<std::string> names;
    svg::BarGroup rmse{"RMSE", {}}, mae{"MAE", {}};
    for (const auto& m : report.models) {
        auto values = m.forecast.predicted;
        values.resize(report.actual.size(), std::nan(""));
        lines.push_back({m.forecast.model, values});
        names.push_back(m.forecast.model);
        rmse.values.push_back(m.metrics.rmse);
        mae.values.push_back(m.metrics.mae);
    }
    const std::string title = "Dst " + event.name + " (" + format_timestamp(event.window.start()) + ", " +
                              std::string(report.in_sample ? "in-sample" : "out-of-sample") + ")";
    const std::string base = "storm_" + safe_filename(event.name);
    const fs::path dir = common.out_dir;

    Outputs outputs;
    outputs.add(dir / (base + ".csv"), csv_text.str());
    outputs.add(dir / (base + "_metrics.csv"), metrics_text.str());
    outputs.add(dir / (base + ".svg"), svg::line_chart(title, "hours from window start", "Dst (nT)", lines));
    outputs.add(dir / (base + "_errors.svg"),
                svg::bar_chart("Errors " + event.name, "nT", names, {rmse, mae}));
    outputs.commit();

    out << "event: " << event.name << " " << format_timestamp(event.window.start()) << " .. "
        << format_timestamp(event.window.end()) << " (" << (report.in_sample ? "in-sample" : "out-of-sample")
        << ")\n"
        << "min actual Dst: " << fixed(report.min_actual, 1) << " nT -> " << name(report.classification)
        << "\n";
    for (const auto& m : report.models) {
        out << "  " << std::left << std::setw(8) << m.forecast.model << std::right << " RMSE "
            << std::setw(8) << fixed(m.metrics.rmse, 2) << "  MAE " << std::setw(8) << fixed(m.metrics.mae, 2)
            << (m.forecast.valid() ? "" : "  (trajectory invalid)") << "\n";
    }
    out << "written: " << (dir / (base + ".csv")).string() << ", " << (dir / (base + ".svg")).string()
        << ", " << (dir / (base + "_errors.svg")).string() << "\n";
    return 0;
}

int cmd_catalog(const Common& common, std::ostream& out)
{
    std::ostringstream text;
    write_catalog_csv(text, catalog());
    const fs::path path = fs::path(common.out_dir) / "catalog.csv";
    Outputs outputs;
    outputs.add(path, text.str());
    outputs.commit();
    for (const auto& m : catalog()) {
        const auto rep = m.reported_complexity();
        const auto comp = m.computed_complexity();
        out << std::left << std::setw(7) << m.name() << std::right << " reported "
            << (rep ? std::to_string(*rep) : "-") << " computed " << (comp ? std::to_string(*comp) : "-")
            << "  " << m.text() << "\n";
    }
    out << "-> " << path.string() << "\n";
    return 0;
}

} // namespace

SearchConfig Config::default_search()
{
    SearchConfig s;
    s.population_count = 4;
    s.iterations = 100;
    s.max_complexity = 30;
    s.max_train_rows = 10000;
    return s;
}

Config parse_config(std::string_view json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    check_keys(root,
               {"input_csv", "derived_csv", "fit_range", "holdout_range", "search", "benchmark", "storms",
                "threads"},
               "");
    Config cfg;
    if (root.contains("input_csv")) cfg.input_csv = get<std::string>(root, "input_csv", "");
    if (root.contains("derived_csv")) cfg.derived_csv = get<std::string>(root, "derived_csv", "");
    if (root.contains("fit_range")) cfg.fit_range = parse_range(root["fit_range"], "fit_range");
    if (root.contains("holdout_range")) cfg.holdout_range = parse_range(root["holdout_range"], "holdout_range");
    if (root.contains("threads")) cfg.threads = get<std::size_t>(root, "threads", "");
    if (root.contains("search")) parse_search(root["search"], cfg);
    if (root.contains("benchmark")) {
        const auto& b = root["benchmark"];
        check_keys(b, {"horizon", "count", "seed"}, "benchmark");
        if (b.contains("horizon")) cfg.benchmark.horizon = get<std::size_t>(b, "horizon", "benchmark");
        if (b.contains("count")) cfg.benchmark.count = get<std::size_t>(b, "count", "benchmark");
        if (b.contains("seed")) cfg.benchmark.seed = get<std::uint64_t>(b, "seed", "benchmark");
    }
    if (root.contains("storms")) parse_storms(root["storms"], cfg);
    try {
        cfg.search.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

Config load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Discover, evaluate and run closed-form dDst/dt models", "dstsr"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "JSON configuration file");
        sub->add_option("--seed", common.seed, "Random seed (search and window sampling)");
        sub->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
        sub->add_option("--out", common.out_dir, "Output directory");
    };

    std::string ingest_in, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Load raw hourly CSV, repair gaps, write derived CSV");
    ingest->add_option("input", ingest_in, "Raw CSV (timestamp, Vsw, Bz_gsm, n_sw, B_mag, T_sw, Dst)");
    ingest->add_option("output", ingest_out, "Derived CSV to write");
    add_common(ingest);

    std::string derived;
    auto* discover = app.add_subcommand("discover", "Run the symbolic-regression ensemble on the fit span");
    discover->add_option("derived", derived, "Derived CSV");
    discover->add_option("--runs", common.runs, "Number of independent runs");
    discover->add_option("--iterations", common.iterations, "Generations per population");
    add_common(discover);

    auto* bench = app.add_subcommand("benchmark", "Random-window forecast benchmark on the holdout span");
    bench->add_option("derived", derived, "Derived CSV");
    bench->add_option("--models", common.models, "'catalog' or a candidates CSV");
    bench->add_option("--horizon", common.horizon, "Forecast horizon in hours");
    bench->add_option("--count", common.count, "Number of random initial conditions");
    add_common(bench);

    std::string event_name, range;
    auto* storm = app.add_subcommand("storm", "72 h storm case study with CSV and SVG output");
    storm->add_option("derived", derived, "Derived CSV");
    storm->add_option("--event", event_name, "Named event (halloween-2003, stpatricks-2015, moderate-2017, ...)");
    storm->add_option("--range", range, "Custom 72 h window as START,END");
    storm->add_option("--models", common.models, "'catalog' or a candidates CSV");
    add_common(storm);

    auto* cat = app.add_subcommand("catalog", "Write the fixed model catalog as CSV");
    add_common(cat);

    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (ingest->parsed()) return cmd_ingest(ingest_in, ingest_out, common, out);
        if (discover->parsed()) return cmd_discover(derived, common, out);
        if (bench->parsed()) return cmd_benchmark(derived, common, out, err);
        if (storm->parsed()) {
            if (event_name.empty() && range.empty()) {
                err << "error: storm needs --event NAME or --range START,END\n";
                return 1;
            }
            return cmd_storm(derived, event_name, range, common, out, err);
        }
        if (cat->parsed()) return cmd_catalog(common, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace dstsr::cli
