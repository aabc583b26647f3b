#include "driftfx/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "driftfx/backtest.hpp"
#include "driftfx/errors.hpp"
#include "driftfx/log.hpp"
#include "driftfx/mixture.hpp"
#include "driftfx/numeric.hpp"

namespace fs = std::filesystem;

namespace driftfx {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

double get_num(const json& j, const char* key, double dflt, const std::string& where) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number())
        throw ConfigError(where + ": '" + std::string(key) + "' must be a number");
    return j.at(key).get<double>();
}

std::string get_str(const json& j, const char* key, const std::string& dflt,
                    const std::string& where) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_string())
        throw ConfigError(where + ": '" + std::string(key) + "' must be a string");
    return j.at(key).get<std::string>();
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream file(path);
    if (!file) throw DataError("cannot open " + path.string() + " for writing");
    file << text;
    if (!file) throw DataError("failed while writing " + path.string());
}

void write_json_file(const fs::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

json parse_json_text(const std::string& text, const std::string& where, bool config_side) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        const std::string msg = where + ": " + e.what();
        if (config_side) throw ConfigError(msg);
        throw DataError(msg);
    }
}

std::string slurp(const fs::path& path) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot open " + path.string());
    std::ostringstream os;
    os << file.rdbuf();
    return os.str();
}

MarketPanel load_data_dir(const fs::path& data_dir) {
    const std::vector<InstrumentSpec> specs =
        load_instrument_specs(data_dir / "instruments.csv");
    std::vector<fs::path> files;
    files.reserve(specs.size());
    for (const auto& s : specs) files.push_back(data_dir / (s.symbol + ".csv"));
    return load_panel(files, specs);
}

MixtureModel load_mixture_file(const fs::path& path) {
    const json j = parse_json_text(slurp(path), path.string(), /*config_side=*/false);
    try {
        return MixtureModel::from_json(j);
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_cumret(const fs::path& path, const std::vector<std::string>& dates,
                  const std::vector<double>& daily) {
    std::ostringstream os;
    os << "date,daily,cumulative\n";
    double cum = 0.0;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        cum += daily[i];
        os << dates[i] << ',' << format_double(daily[i]) << ',' << format_double(cum) << '\n';
    }
    write_text(path, os.str());
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

struct SynthArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
};

struct FitArgs {
    std::string data_dir;
    std::string out_dir;
    std::uint64_t seed = 0;
    double train_fraction = 1.0 / 3.0;
    unsigned long long train_count = 0;
    bool has_train_count = false;
    int k_min = 1;
    int k_max = 25;
};

struct BacktestArgs {
    std::string data_dir;
    std::string out_dir;
    std::string mixture_path;
    std::string strategies = "carry,drl,mom";
    std::uint64_t seed = 0;
    double train_fraction = 1.0 / 3.0;
    unsigned long long train_count = 0;
    bool has_train_count = false;
    bool no_costs = false;
    bool no_carry = false;
    double tau = 0.99;
    double alpha = 1.0;
    int k_min = 1;
    int k_max = 25;
};

struct ReportArgs {
    std::string records_path;
    std::string out_dir;
};

void cmd_synth(const SynthArgs& a) {
    const json j =
        parse_json_text(slurp(a.config_path), a.config_path, /*config_side=*/true);
    const SynthConfig config = synth_config_from_json(j);
    const MarketPanel panel = synth_panel(config, a.seed);

    const fs::path out = a.out_dir;
    ensure_dir(out);
    write_panel(panel, out);

    json manifest;
    std::vector<std::string> files = {"instruments.csv"};
    std::vector<std::string> symbols;
    for (const auto& spec : panel.instruments) {
        files.push_back(spec.symbol + ".csv");
        symbols.push_back(spec.symbol);
    }
    manifest["files"] = files;
    manifest["instruments"] = symbols;
    manifest["n_dates"] = panel.n_dates();
    manifest["seed"] = a.seed;
    manifest["start_date"] = config.start_date;
    write_json_file(out / "manifest.json", manifest);

    std::cout << "wrote " << panel.n_dates() << " dates x " << panel.n_instruments()
              << " instruments to " << out.string() << "\n";
}

void cmd_fit(const FitArgs& a) {
    const MarketPanel panel = load_data_dir(a.data_dir);
    std::size_t n_train = 0;
    if (a.has_train_count) {
        n_train = a.train_count;
        if (n_train == 0 || n_train > panel.n_dates())
            throw ConfigError("train_count " + std::to_string(a.train_count) +
                              " out of range for " + std::to_string(panel.n_dates()) +
                              " dates");
    } else {
        n_train = split_counts(panel.n_dates(), a.train_fraction).first;
    }

    MixtureFitConfig fit;
    fit.k_min = a.k_min;
    fit.k_max = a.k_max;
    fit.seed = a.seed;
    fit.validate();
    const FjResult res =
        fj_fit(panel.returns.topRows(static_cast<Eigen::Index>(n_train)), fit);

    const fs::path out = a.out_dir;
    ensure_dir(out);
    write_json_file(out / "mixture.json", res.model.to_json());
    json meta;
    meta["converged"] = res.converged;
    meta["k"] = res.model.size();
    meta["k_path"] = res.k_path;
    meta["message_length"] = res.message_length;
    meta["n_dates"] = panel.n_dates();
    meta["n_train"] = n_train;
    meta["seed"] = a.seed;
    meta["sweeps"] = res.sweeps;
    write_json_file(out / "fit_meta.json", meta);

    std::cout << "fitted " << res.model.size() << " feature units on " << n_train
              << " training dates (message length " << format_double(res.message_length)
              << ")\n";
}

void cmd_backtest(const BacktestArgs& a) {
    const MarketPanel panel = load_data_dir(a.data_dir);

    BacktestConfig config;
    config.train_fraction = a.train_fraction;
    if (a.has_train_count) config.train_count = a.train_count;
    config.costs_enabled = !a.no_costs;
    config.carry_enabled = !a.no_carry;
    config.strategies = split_list(a.strategies);
    config.seed = a.seed;
    config.hyper.decay = a.tau;
    config.hyper.ridge = a.alpha;
    config.hyper.k_min = a.k_min;
    config.hyper.k_max = a.k_max;

    MixtureModel preset;
    const MixtureModel* preset_ptr = nullptr;
    if (!a.mixture_path.empty()) {
        preset = load_mixture_file(a.mixture_path);
        preset_ptr = &preset;
    }

    const RunResult res = run(panel, config, preset_ptr);

    const fs::path out = a.out_dir;
    ensure_dir(out);
    write_records_csv(res.records, out / "records.csv");
    write_json_file(out / "report.json", res.report.to_json());
    write_text(out / "report.txt", res.report.render());
    write_json_file(out / "mixture.json", res.mixture.to_json());
    for (const auto& [strategy, daily] : res.report.portfolio_net)
        write_cumret(out / ("cumret_" + strategy + ".csv"), res.report.dates, daily);

    json meta;
    meta["carry_enabled"] = config.carry_enabled;
    meta["costs_enabled"] = config.costs_enabled;
    json hyper;
    hyper["cov_floor"] = config.hyper.cov_floor;
    hyper["decay"] = config.hyper.decay;
    hyper["k_max"] = config.hyper.k_max;
    hyper["k_min"] = config.hyper.k_min;
    hyper["lambda_init"] = config.hyper.lambda_init;
    hyper["lambda_min"] = config.hyper.lambda_min;
    hyper["max_iter"] = config.hyper.max_iter;
    hyper["ridge"] = config.hyper.ridge;
    hyper["tol"] = config.hyper.tol;
    meta["hyper"] = std::move(hyper);
    meta["k_path"] = res.k_path;
    meta["lambdas"] = res.lambdas;
    meta["message_length"] = res.message_length;
    meta["mixture_components"] = res.mixture.size();
    meta["mixture_preset"] = !a.mixture_path.empty();
    meta["n_dates"] = panel.n_dates();
    meta["n_test"] = res.n_test;
    meta["n_train"] = res.n_train;
    meta["seed"] = config.seed;
    {
        std::vector<std::string> sorted = config.strategies;
        std::sort(sorted.begin(), sorted.end());
        meta["strategies"] = sorted;
    }
    write_json_file(out / "run_meta.json", meta);

    std::cout << res.report.render();
}

void cmd_report(const ReportArgs& a) {
    const std::vector<StepRecord> records = read_records_csv(a.records_path);
    const PerformanceReport report = build_report(records);
    const fs::path out = a.out_dir;
    ensure_dir(out);
    write_json_file(out / "report.json", report.to_json());
    write_text(out / "report.txt", report.render());
    std::cout << report.render();
}

}  // namespace

SynthConfig synth_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
    check_keys(j, {"start_date", "n_days", "instruments"}, "synth config");

    SynthConfig config;
    config.start_date = get_str(j, "start_date", config.start_date, "synth config");
    if (!j.contains("n_days") || !j.at("n_days").is_number_integer())
        throw ConfigError("synth config: 'n_days' (integer) is required");
    config.n_days = j.at("n_days").get<int>();
    if (!j.contains("instruments") || !j.at("instruments").is_array())
        throw ConfigError("synth config: 'instruments' (array) is required");

    for (const auto& ij : j.at("instruments")) {
        const std::string where =
            "instrument " + std::to_string(config.instruments.size());
        if (!ij.is_object()) throw ConfigError(where + ": must be a JSON object");
        check_keys(ij,
                   {"symbol", "ric", "tn_ric", "pip_size", "initial_mid", "drift", "vol",
                    "jump_intensity", "jump_size", "rel_spread", "e1", "e2",
                    "points_spread"},
                   where);
        SynthInstrumentConfig ic;
        ic.spec.symbol = get_str(ij, "symbol", "", where);
        if (ic.spec.symbol.empty())
            throw ConfigError(where + ": 'symbol' (string) is required");
        ic.spec.ric = get_str(ij, "ric", ic.spec.symbol + "=", where);
        ic.spec.tn_ric = get_str(ij, "tn_ric", ic.spec.symbol + "TN=", where);
        ic.spec.pip_size = get_num(ij, "pip_size", 1e-4, where);
        ic.initial_mid = get_num(ij, "initial_mid", 1.0, where);
        ic.drift = get_num(ij, "drift", 0.0, where);
        ic.vol = get_num(ij, "vol", 0.0, where);
        ic.jump_intensity = get_num(ij, "jump_intensity", 0.0, where);
        ic.jump_size = get_num(ij, "jump_size", 0.0, where);
        ic.rel_spread = get_num(ij, "rel_spread", 0.0, where);
        ic.e1 = get_num(ij, "e1", 0.0, where);
        ic.e2 = get_num(ij, "e2", 0.0, where);
        ic.points_spread = get_num(ij, "points_spread", 0.0, where);
        config.instruments.push_back(std::move(ic));
    }
    config.validate();
    return config;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"sequential-learning FX strategy lab"};
    app.require_subcommand(1);

    SynthArgs sa;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic quote panel");
    synth->add_option("--config", sa.config_path, "panel spec JSON")->required();
    synth->add_option("--out-dir", sa.out_dir, "output directory")->required();
    synth->add_option("--seed", sa.seed, "random seed (default 0)");

    FitArgs fa;
    CLI::App* fit =
        app.add_subcommand("fit-features", "fit the feature mixture on the training window");
    fit->add_option("--data-dir", fa.data_dir, "panel directory")->required();
    fit->add_option("--out-dir", fa.out_dir, "output directory")->required();
    fit->add_option("--seed", fa.seed, "random seed (default 0)");
    fit->add_option("--train-fraction", fa.train_fraction,
                    "leading fraction of dates used for training (default 1/3)");
    CLI::Option* fit_tc =
        fit->add_option("--train-count", fa.train_count, "explicit training-date count");
    fit->add_option("--k-min", fa.k_min, "minimum component count (default 1)");
    fit->add_option("--k-max", fa.k_max, "starting component count (default 25)");

    BacktestArgs ba;
    CLI::App* backtest =
        app.add_subcommand("backtest", "walk-forward run over a quote panel");
    backtest->add_option("--data-dir", ba.data_dir, "panel directory")->required();
    backtest->add_option("--out-dir", ba.out_dir, "output directory")->required();
    backtest->add_option("--mixture", ba.mixture_path,
                         "reuse a fitted feature mixture (mixture.json)");
    backtest->add_option("--strategies", ba.strategies,
                         "comma list from {carry,drl,mom} (default all)");
    backtest->add_option("--seed", ba.seed, "random seed (default 0)");
    backtest->add_option("--train-fraction", ba.train_fraction,
                         "leading fraction of dates used for training (default 1/3)");
    CLI::Option* bt_tc = backtest->add_option("--train-count", ba.train_count,
                                              "explicit training-date count");
    backtest->add_flag("--no-costs", ba.no_costs, "zero out transaction costs");
    backtest->add_flag("--no-carry", ba.no_carry, "zero out overnight funding");
    backtest->add_option("--tau", ba.tau, "forgetting factor (default 0.99)");
    backtest->add_option("--alpha", ba.alpha, "ridge / precision seed (default 1)");
    backtest->add_option("--k-min", ba.k_min, "minimum component count (default 1)");
    backtest->add_option("--k-max", ba.k_max, "starting component count (default 25)");

    ReportArgs ra;
    CLI::App* report =
        app.add_subcommand("report", "rebuild the performance report from records.csv");
    report->add_option("--records", ra.records_path, "records.csv path")->required();
    report->add_option("--out-dir", ra.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
        fa.has_train_count = fit_tc->count() > 0;
        ba.has_train_count = bt_tc->count() > 0;
        if (synth->parsed()) cmd_synth(sa);
        if (fit->parsed()) cmd_fit(fa);
        if (backtest->parsed()) cmd_backtest(ba);
        if (report->parsed()) cmd_report(ra);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace driftfx
