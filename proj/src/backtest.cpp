#include "driftfx/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "driftfx/errors.hpp"
#include "driftfx/log.hpp"
#include "driftfx/numeric.hpp"
#include "driftfx/rbf.hpp"

namespace driftfx {

namespace {

const std::set<std::string>& known_strategies() {
    static const std::set<std::string> known = {"carry", "drl", "mom"};
    return known;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string fmt_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

json stats_to_json(const StrategyStats& s) {
    json j;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["std"] = s.stddev;
    j["min"] = s.min;
    j["q25"] = s.q25;
    j["q50"] = s.q50;
    j["q75"] = s.q75;
    j["max"] = s.max;
    j["sum"] = s.sum;
    j["ir"] = s.ir ? json(*s.ir) : json(nullptr);
    j["prob_positive_alpha"] =
        s.prob_positive_alpha ? json(*s.prob_positive_alpha) : json(nullptr);
    j["ann_compound"] = s.ann_compound ? json(*s.ann_compound) : json(nullptr);
    return j;
}

}  // namespace

void BacktestConfig::validate() const {
    if (strategies.empty()) throw ConfigError("no strategies requested");
    std::set<std::string> seen;
    for (const auto& s : strategies) {
        if (!known_strategies().count(s))
            throw ConfigError("unknown strategy '" + s + "' (know: carry, drl, mom)");
        if (!seen.insert(s).second) throw ConfigError("duplicate strategy '" + s + "'");
    }
    if (train_count) {
        if (*train_count == 0) throw ConfigError("train_count must be positive");
    } else if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1)");
    }
    const HyperParams& h = hyper;
    if (!(h.decay > 0.0 && h.decay <= 1.0)) throw ConfigError("decay must lie in (0, 1]");
    if (!(h.ridge > 0.0)) throw ConfigError("ridge must be positive");
    if (!(h.lambda_init > 0.0)) throw ConfigError("lambda_init must be positive");
    if (!(h.lambda_min > 0.0)) throw ConfigError("lambda_min must be positive");
    if (h.k_min < 1) throw ConfigError("k_min must be at least 1");
    if (h.k_max < h.k_min) throw ConfigError("k_max must be at least k_min");
    if (!(h.tol > 0.0)) throw ConfigError("tol must be positive");
    if (h.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (h.cov_floor < 0.0) throw ConfigError("cov_floor must be nonnegative");
}

std::pair<std::size_t, std::size_t> split_counts(std::size_t n_dates, double fraction) {
    const auto train =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_dates)));
    const std::size_t capped = std::min(train, n_dates);
    const std::size_t test = n_dates - capped;
    if (capped == 0 || test == 0)
        throw ConfigError("date split leaves an empty part (train=" + std::to_string(capped) +
                          ", test=" + std::to_string(test) + " of " + std::to_string(n_dates) +
                          ")");
    return {capped, test};
}

StrategyStats performance_stats(const std::vector<double>& daily) {
    if (daily.empty()) throw ConfigError("performance stats of an empty series");
    StrategyStats s;
    s.count = daily.size();
    const double n = static_cast<double>(s.count);
    s.sum = std::accumulate(daily.begin(), daily.end(), 0.0);
    s.mean = s.sum / n;
    if (s.count >= 2) {
        double ss = 0.0;
        for (double x : daily) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / (n - 1.0));
    }
    const auto [lo, hi] = std::minmax_element(daily.begin(), daily.end());
    s.min = *lo;
    s.max = *hi;
    s.q25 = quantile_linear(daily, 0.25);
    s.q50 = quantile_linear(daily, 0.50);
    s.q75 = quantile_linear(daily, 0.75);
    if (s.stddev > 0.0) {
        s.ir = information_ratio(s.mean, 0.0, s.stddev);
        s.prob_positive_alpha = normal_cdf(*s.ir);
    }
    if (1.0 + s.sum > 0.0) s.ann_compound = std::pow(1.0 + s.sum, 252.0 / n) - 1.0;
    return s;
}

PortfolioSeries aggregate_portfolio(const std::vector<StepRecord>& records) {
    if (records.empty()) throw DataError("no records to report on");

    struct Cell {
        double net = 0.0, carry = 0.0;
        std::size_t count = 0;
    };
    std::set<std::string> dates, instruments;
    std::map<std::string, std::map<std::string, Cell>> cells;  // strategy -> date -> cell
    std::set<std::string> seen;                                // duplicate guard
    for (const auto& r : records) {
        if (!known_strategies().count(r.strategy))
            throw DataError("unknown strategy '" + r.strategy + "' in records");
        dates.insert(r.date);
        instruments.insert(r.instrument);
        const std::string key = r.strategy + '\x1f' + r.date + '\x1f' + r.instrument;
        if (!seen.insert(key).second)
            throw DataError("duplicate record: " + r.strategy + " " + r.instrument + " on " +
                            r.date);
        Cell& c = cells[r.strategy][r.date];
        c.net += r.net;
        c.carry += r.carry;
        ++c.count;
    }

    const auto n_inst = static_cast<double>(instruments.size());
    PortfolioSeries series;
    series.dates.assign(dates.begin(), dates.end());
    for (const auto& [strategy, by_date] : cells) {
        std::vector<double> net_series, carry_series;
        net_series.reserve(series.dates.size());
        carry_series.reserve(series.dates.size());
        for (const auto& date : series.dates) {
            auto it = by_date.find(date);
            if (it == by_date.end() || it->second.count != instruments.size())
                throw DataError("incomplete instrument coverage for strategy " + strategy +
                                " on " + date);
            net_series.push_back(it->second.net / n_inst);
            carry_series.push_back(it->second.carry / n_inst);
        }
        series.net[strategy] = std::move(net_series);
        series.carry[strategy] = std::move(carry_series);
    }
    return series;
}

std::map<std::string, StrategyStats> decompose_funding(const std::vector<StepRecord>& records) {
    const PortfolioSeries series = aggregate_portfolio(records);
    std::map<std::string, StrategyStats> stats;
    for (const auto& [strategy, carry] : series.carry)
        stats[strategy] = performance_stats(carry);
    return stats;
}

PerformanceReport build_report(const std::vector<StepRecord>& records) {
    PortfolioSeries series = aggregate_portfolio(records);
    PerformanceReport rep;
    rep.dates = std::move(series.dates);
    for (const auto& [strategy, net] : series.net) {
        rep.net_stats[strategy] = performance_stats(net);
        rep.funding_stats[strategy] = performance_stats(series.carry.at(strategy));
    }
    rep.portfolio_net = std::move(series.net);
    rep.portfolio_carry = std::move(series.carry);
    return rep;
}

json PerformanceReport::to_json() const {
    json j;
    j["dates"] = dates;
    json series = json::object();
    for (const auto& [strategy, net] : portfolio_net) {
        json s;
        s["net"] = net;
        s["carry"] = portfolio_carry.at(strategy);
        series[strategy] = std::move(s);
    }
    j["series"] = std::move(series);
    json net_j = json::object(), fund_j = json::object();
    for (const auto& [strategy, stats] : net_stats) net_j[strategy] = stats_to_json(stats);
    for (const auto& [strategy, stats] : funding_stats) fund_j[strategy] = stats_to_json(stats);
    j["stats"]["net"] = std::move(net_j);
    j["stats"]["funding"] = std::move(fund_j);
    return j;
}

std::string PerformanceReport::render() const {
    std::ostringstream os;
    constexpr int label_w = 12, cell_w = 14;

    auto table = [&](const std::string& title,
                     const std::map<std::string, StrategyStats>& stats, bool ratios) {
        os << title << "\n";
        os << std::left << std::setw(label_w) << "";
        for (const auto& [strategy, _] : stats)
            os << std::right << std::setw(cell_w) << strategy;
        os << "\n";
        auto row = [&](const std::string& label, auto&& cell) {
            os << std::left << std::setw(label_w) << label;
            for (const auto& [_, s] : stats) os << std::right << std::setw(cell_w) << cell(s);
            os << "\n";
        };
        row("count", [](const StrategyStats& s) { return std::to_string(s.count); });
        row("mean", [](const StrategyStats& s) { return fmt_num(s.mean); });
        row("std", [](const StrategyStats& s) { return fmt_num(s.stddev); });
        row("min", [](const StrategyStats& s) { return fmt_num(s.min); });
        row("25%", [](const StrategyStats& s) { return fmt_num(s.q25); });
        row("50%", [](const StrategyStats& s) { return fmt_num(s.q50); });
        row("75%", [](const StrategyStats& s) { return fmt_num(s.q75); });
        row("max", [](const StrategyStats& s) { return fmt_num(s.max); });
        row("sum", [](const StrategyStats& s) { return fmt_num(s.sum); });
        if (ratios) {
            row("ir", [](const StrategyStats& s) {
                return s.ir ? fmt_num(*s.ir) : std::string("n/a");
            });
            row("p(alpha>0)", [](const StrategyStats& s) {
                return s.prob_positive_alpha ? fmt_num(*s.prob_positive_alpha)
                                             : std::string("n/a");
            });
            row("ann", [](const StrategyStats& s) {
                return s.ann_compound ? fmt_num(*s.ann_compound) : std::string("n/a");
            });
        }
        os << "\n";
    };

    table("daily net returns, equal-weight portfolio", net_stats, true);
    table("funding component", funding_stats, false);
    return os.str();
}

RunResult run(const MarketPanel& panel, const BacktestConfig& config,
              const MixtureModel* preset_mixture) {
    panel.validate();
    config.validate();

    const std::size_t n = panel.n_dates();
    const std::size_t d = panel.n_instruments();

    std::size_t n_train = 0, n_test = 0;
    if (config.train_count) {
        n_train = *config.train_count;
        if (n_train >= n)
            throw ConfigError("train_count " + std::to_string(n_train) +
                              " leaves no test dates out of " + std::to_string(n));
        n_test = n - n_train;
    } else {
        std::tie(n_train, n_test) = split_counts(n, config.train_fraction);
    }
    if (n_train < 10 || n_test < 10)
        throw ConfigError("need at least 10 dates in each part, got train=" +
                          std::to_string(n_train) + " test=" + std::to_string(n_test));

    std::vector<std::string> strategies = config.strategies;
    std::sort(strategies.begin(), strategies.end());
    strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());
    const bool want_carry = std::count(strategies.begin(), strategies.end(), "carry") > 0;
    const bool want_drl = std::count(strategies.begin(), strategies.end(), "drl") > 0;
    const bool want_mom = std::count(strategies.begin(), strategies.end(), "mom") > 0;

    RunResult out;
    out.n_train = n_train;
    out.n_test = n_test;

    const Eigen::MatrixXd train_data =
        panel.returns.topRows(static_cast<Eigen::Index>(n_train));
    if (preset_mixture) {
        preset_mixture->validate();
        if (preset_mixture->dim != static_cast<Eigen::Index>(d))
            throw ConfigError("feature mixture dimension " +
                              std::to_string(preset_mixture->dim) + " != " +
                              std::to_string(d) + " panel instruments");
        out.mixture = *preset_mixture;
        out.message_length = message_length(out.mixture, train_data);
    } else {
        MixtureFitConfig fit;
        fit.k_min = config.hyper.k_min;
        fit.k_max = config.hyper.k_max;
        fit.tol = config.hyper.tol;
        fit.max_iter = config.hyper.max_iter;
        fit.cov_floor = config.hyper.cov_floor;
        fit.seed = config.seed;
        FjResult fj = fj_fit(train_data, fit);
        out.mixture = std::move(fj.model);
        out.k_path = std::move(fj.k_path);
        out.message_length = fj.message_length;
        log_info("feature mixture: " + std::to_string(out.mixture.size()) +
                 " components, message length " + fmt_num(out.message_length));
    }

    const RbfNetwork net = RbfNetwork::from_mixture(out.mixture);
    const Eigen::Index m = net.size();

    DrlConfig dcfg;
    dcfg.decay = config.hyper.decay;
    dcfg.ridge = config.hyper.ridge;
    dcfg.lambda_init = config.hyper.lambda_init;
    dcfg.lambda_min = config.hyper.lambda_min;

    std::vector<DrlAgent> drl;
    std::vector<MomentumAgent> mom;
    if (want_drl)
        for (std::size_t i = 0; i < d; ++i) drl.emplace_back(m + 2, dcfg);
    if (want_mom)
        for (std::size_t i = 0; i < d; ++i)
            mom.emplace_back(m, config.hyper.ridge, config.hyper.decay);
    std::vector<double> carry_prev(d, 0.0), mom_prev(d, 0.0);
    std::vector<std::vector<double>> drl_train_rewards(d);

    auto inputs_at = [&](std::size_t t, std::size_t i) {
        StepInputs in;
        in.u = panel.returns.row(static_cast<Eigen::Index>(t)).transpose();
        const QuotePair& q = panel.spot[t][i];
        in.price_change = mid(q) - mid(panel.spot[t - 1][i]);
        in.half_spread = config.costs_enabled ? half_spread(q) : 0.0;
        if (config.carry_enabled) {
            const CarryRates rates =
                carry_rates(q, tomnext_outright(q, panel.fpts[t][i], panel.instruments[i]));
            in.carry_long = rates.long_rate;
            in.carry_short = rates.short_rate;
        }
        return in;
    };

    // Training pass: learners stream through the window; the untrained risk
    // appetite stays at lambda_init. Baseline position state also warms up so
    // the first test-day trade is charged against a real previous position.
    for (std::size_t t = 1; t < n_train; ++t) {
        for (std::size_t i = 0; i < d; ++i) {
            const StepInputs in = inputs_at(t, i);
            if (want_drl) {
                const DrlAgent::Outcome o = drl[i].step(net, in);
                drl_train_rewards[i].push_back(o.net);
            }
            if (want_mom)
                mom_prev[i] = mom[i].step(net, in.u, panel.returns(static_cast<Eigen::Index>(t),
                                                                   static_cast<Eigen::Index>(i)));
            if (want_carry) carry_prev[i] = carry_position({in.carry_long, in.carry_short});
        }
    }

    if (want_drl) {
        for (std::size_t i = 0; i < d; ++i) {
            const double lam =
                calibrate_lambda(drl_train_rewards[i], config.hyper.lambda_min);
            drl[i].lambda = lam;
            out.lambdas[panel.instruments[i].symbol] = lam;
        }
    }

    // Test pass: learners keep adapting online; every reward component is
    // booked as a simple return against the same-day mid.
    out.records.reserve(n_test * d * strategies.size());
    for (std::size_t t = n_train; t < n; ++t) {
        for (std::size_t i = 0; i < d; ++i) {
            const StepInputs in = inputs_at(t, i);
            const double scale = mid(panel.spot[t][i]);
            for (const std::string& strategy : strategies) {
                double f = 0.0, gross = 0.0, cost = 0.0, carry = 0.0;
                if (strategy == "drl") {
                    const DrlAgent::Outcome o = drl[i].step(net, in);
                    f = o.position;
                    gross = o.gross;
                    cost = o.cost;
                    carry = o.carry;
                } else if (strategy == "mom") {
                    f = mom[i].step(net, in.u, panel.returns(static_cast<Eigen::Index>(t),
                                                             static_cast<Eigen::Index>(i)));
                    gross = in.price_change * mom_prev[i];
                    cost = -in.half_spread * std::abs(f - mom_prev[i]);
                    carry = carry_pnl(f, in.carry_long, in.carry_short);
                    mom_prev[i] = f;
                } else {  // carry
                    f = carry_position({in.carry_long, in.carry_short});
                    gross = in.price_change * carry_prev[i];
                    cost = -in.half_spread * std::abs(f - carry_prev[i]);
                    carry = carry_pnl(f, in.carry_long, in.carry_short);
                    carry_prev[i] = f;
                }
                StepRecord rec;
                rec.date = panel.dates[t];
                rec.instrument = panel.instruments[i].symbol;
                rec.strategy = strategy;
                rec.position = f;
                // + 0.0 folds IEEE negative zeros (δ·|Δf| with Δf = 0, ...)
                // into plain zeros before anything is persisted.
                rec.gross = gross / scale + 0.0;
                rec.cost = cost / scale + 0.0;
                rec.carry = carry / scale + 0.0;
                rec.net = rec.gross + rec.cost + rec.carry;
                out.records.push_back(std::move(rec));
            }
        }
    }

    out.report = build_report(out.records);
    return out;
}

void write_records_csv(const std::vector<StepRecord>& records,
                       const std::filesystem::path& path) {
    std::ofstream file(path);
    if (!file) throw DataError("cannot open " + path.string() + " for writing");
    file << "date,instrument,strategy,position,gross,cost,carry,net\n";
    for (const auto& r : records) {
        file << r.date << ',' << r.instrument << ',' << r.strategy << ','
             << format_double(r.position) << ',' << format_double(r.gross) << ','
             << format_double(r.cost) << ',' << format_double(r.carry) << ','
             << format_double(r.net) << '\n';
    }
    if (!file) throw DataError("failed while writing " + path.string());
}

std::vector<StepRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(file, line)) throw DataError(path.string() + " is empty");
    {
        std::string header = line;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header != "date,instrument,strategy,position,gross,cost,carry,net")
            throw DataError(path.string() + ": unexpected header '" + header + "'");
    }
    std::vector<StepRecord> records;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> f = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (f.size() != 8)
            throw DataError(where + ": expected 8 fields, got " + std::to_string(f.size()));
        StepRecord r;
        r.date = f[0];
        validate_iso_date(r.date, where);
        r.instrument = f[1];
        r.strategy = f[2];
        if (r.instrument.empty()) throw DataError(where + ": empty instrument");
        if (r.strategy.empty()) throw DataError(where + ": empty strategy");
        r.position = parse_double(f[3], where);
        r.gross = parse_double(f[4], where);
        r.cost = parse_double(f[5], where);
        r.carry = parse_double(f[6], where);
        r.net = parse_double(f[7], where);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace driftfx
