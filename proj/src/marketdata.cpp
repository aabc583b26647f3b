#include "driftfx/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "driftfx/errors.hpp"
#include "driftfx/log.hpp"
#include "driftfx/numeric.hpp"
#include "driftfx/rng.hpp"

namespace driftfx {

// --- dates -------------------------------------------------------------------

void validate_iso_date(const std::string& date, const std::string& where) {
    const bool shape_ok = date.size() == 10 && date[4] == '-' && date[7] == '-' &&
                          std::all_of(date.begin(), date.end(), [](char c) {
                              return c == '-' || (c >= '0' && c <= '9');
                          });
    if (!shape_ok) throw DataError("bad ISO date '" + date + "' at " + where);
    const int month = std::stoi(date.substr(5, 2));
    const int day = std::stoi(date.substr(8, 2));
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw DataError("bad ISO date '" + date + "' at " + where);
}

namespace {

// Civil-calendar <-> serial day algorithms (proleptic Gregorian).
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long yy = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::string add_days(const std::string& date, int n) {
    validate_iso_date(date, "add_days");
    const int y = std::stoi(date.substr(0, 4));
    const int m = std::stoi(date.substr(5, 2));
    const int d = std::stoi(date.substr(8, 2));
    int yy = 0, mm = 0, dd = 0;
    civil_from_days(days_from_civil(y, m, d) + n, yy, mm, dd);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", yy, mm, dd);
    return std::string(buf);
}

// --- quote ops ---------------------------------------------------------------

void InstrumentSpec::validate() const {
    if (symbol.empty()) throw ConfigError("instrument symbol must be nonempty");
    if (!(pip_size > 0.0)) throw ConfigError("pip_size must be positive for " + symbol);
}

double mid(const QuotePair& q) { return 0.5 * (q.bid + q.ask); }

double half_spread(const QuotePair& q) { return std::max(0.5 * (q.ask - q.bid), 0.0); }

TomnextOutright tomnext_outright(const QuotePair& spot, const ForwardPointsQuote& points,
                                 const InstrumentSpec& spec) {
    if (spot.date != points.date)
        throw DataError("tomnext_outright: spot date " + spot.date + " != points date " +
                        points.date + " for " + spec.symbol);
    TomnextOutright out;
    out.bid = spot.bid + points.ask * spec.pip_size;
    out.ask = spot.ask + points.bid * spec.pip_size;
    return out;
}

CarryRates carry_rates(const QuotePair& spot, const TomnextOutright& outright) {
    CarryRates rates;
    rates.long_rate = spot.bid - outright.ask;
    rates.short_rate = outright.bid - spot.ask;
    return rates;
}

double simple_return(double mid_t, double mid_prev) {
    if (!(mid_t > 0.0) || !(mid_prev > 0.0))
        throw NumericError("simple_return requires positive mids");
    return mid_t / mid_prev - 1.0;
}

double forward_points_mid(double mid_spot, double e1, double e2, double pip_size) {
    if (!(pip_size > 0.0)) throw ConfigError("pip_size must be positive");
    return mid_spot * (e2 - e1) / (360.0 * pip_size);
}

// --- panel -------------------------------------------------------------------

void MarketPanel::validate() const {
    const std::size_t n = n_dates();
    const std::size_t k = n_instruments();
    if (spot.size() != n || fpts.size() != n)
        throw DataError("panel grids misaligned with date axis");
    for (std::size_t t = 0; t < n; ++t) {
        if (spot[t].size() != k || fpts[t].size() != k)
            throw DataError("panel grids misaligned with instrument axis");
        if (t > 0 && !(dates[t - 1] < dates[t]))
            throw DataError("panel dates not strictly increasing near " + dates[t]);
    }
    if (static_cast<std::size_t>(returns.rows()) != n ||
        static_cast<std::size_t>(returns.cols()) != k)
        throw DataError("returns grid misaligned");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

struct RawRow {
    double bid_spot, ask_spot, bid_fpts, ask_fpts;
};

void fill_returns(MarketPanel& panel) {
    const auto n = static_cast<Eigen::Index>(panel.n_dates());
    const auto k = static_cast<Eigen::Index>(panel.n_instruments());
    panel.returns = Eigen::MatrixXd::Zero(n, k);
    for (Eigen::Index t = 1; t < n; ++t)
        for (Eigen::Index i = 0; i < k; ++i)
            panel.returns(t, i) = simple_return(mid(panel.spot[t][i]), mid(panel.spot[t - 1][i]));
}

void flag_crossed(MarketPanel& panel) {
    int crossed_spot = 0, crossed_fpts = 0;
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        for (std::size_t i = 0; i < panel.n_instruments(); ++i) {
            if (panel.spot[t][i].bid > panel.spot[t][i].ask) ++crossed_spot;
            if (panel.fpts[t][i].bid > panel.fpts[t][i].ask) ++crossed_fpts;
        }
    }
    if (crossed_spot > 0)
        panel.warnings.push_back("crossed spot quotes on " + std::to_string(crossed_spot) +
                                 " rows");
    if (crossed_fpts > 0)
        panel.warnings.push_back("crossed points quotes on " + std::to_string(crossed_fpts) +
                                 " rows");
    for (const auto& w : panel.warnings) log_warn(w);
}

}  // namespace

MarketPanel load_panel(const std::vector<std::filesystem::path>& files,
                       const std::vector<InstrumentSpec>& specs) {
    if (files.size() != specs.size())
        throw ConfigError("load_panel: one file per instrument spec required");
    if (files.empty()) throw ConfigError("load_panel: no instruments");
    for (const auto& s : specs) s.validate();

    static const std::vector<std::string> kHeader = {"date", "bid_spot", "ask_spot", "bid_fpts",
                                                     "ask_fpts"};
    std::vector<std::map<std::string, RawRow>> by_date(files.size());
    std::set<std::string> dropped;  // dates with missing cells anywhere

    for (std::size_t i = 0; i < files.size(); ++i) {
        std::ifstream in(files[i]);
        if (!in) throw DataError("cannot open " + files[i].string());
        std::string line;
        std::size_t line_no = 0;
        if (!std::getline(in, line))
            throw DataError("empty file " + files[i].string());
        ++line_no;
        if (split_csv_line(line) != kHeader)
            throw DataError("bad header in " + files[i].string() +
                            " (want date,bid_spot,ask_spot,bid_fpts,ask_fpts)");
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") continue;
            const auto fields = split_csv_line(line);
            const std::string where = files[i].string() + ":" + std::to_string(line_no);
            if (fields.size() != 5)
                throw DataError("expected 5 fields, got " + std::to_string(fields.size()) +
                                " at " + where);
            validate_iso_date(fields[0], where);
            const bool any_missing = fields[1].empty() || fields[2].empty() ||
                                     fields[3].empty() || fields[4].empty();
            if (any_missing) {
                dropped.insert(fields[0]);
                continue;
            }
            RawRow row{parse_double(fields[1], where), parse_double(fields[2], where),
                       parse_double(fields[3], where), parse_double(fields[4], where)};
            if (!(row.bid_spot > 0.0) || !(row.ask_spot > 0.0))
                throw DataError("nonpositive spot price at " + where);
            if (by_date[i].count(fields[0]))
                throw DataError("duplicate date " + fields[0] + " at " + where);
            by_date[i][fields[0]] = row;
        }
    }

    // Date axis: intersection across instruments, minus missing-cell dates.
    std::vector<std::string> dates;
    for (const auto& [date, row] : by_date[0]) {
        if (dropped.count(date)) continue;
        bool everywhere = true;
        for (std::size_t i = 1; i < by_date.size() && everywhere; ++i)
            everywhere = by_date[i].count(date) > 0;
        if (everywhere) dates.push_back(date);
    }
    if (dates.empty()) throw DataError("load_panel: empty date intersection");

    MarketPanel panel;
    panel.dates = std::move(dates);  // map iteration is already sorted
    panel.instruments = specs;
    panel.spot.resize(panel.n_dates());
    panel.fpts.resize(panel.n_dates());
    for (std::size_t t = 0; t < panel.n_dates(); ++t) {
        panel.spot[t].resize(specs.size());
        panel.fpts[t].resize(specs.size());
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const RawRow& row = by_date[i].at(panel.dates[t]);
            panel.spot[t][i] = QuotePair{panel.dates[t], row.bid_spot, row.ask_spot};
            panel.fpts[t][i] = ForwardPointsQuote{panel.dates[t], row.bid_fpts, row.ask_fpts};
        }
    }
    if (!dropped.empty())
        panel.warnings.push_back("dropped " + std::to_string(dropped.size()) +
                                 " dates with missing cells");
    fill_returns(panel);
    flag_crossed(panel);
    panel.validate();
    return panel;
}

void write_panel(const MarketPanel& panel, const std::filesystem::path& dir) {
    panel.validate();
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < panel.n_instruments(); ++i) {
        const auto path = dir / (panel.instruments[i].symbol + ".csv");
        std::ofstream out(path);
        if (!out) throw DataError("cannot write " + path.string());
        out << "date,bid_spot,ask_spot,bid_fpts,ask_fpts\n";
        for (std::size_t t = 0; t < panel.n_dates(); ++t) {
            out << panel.dates[t] << ',' << format_double(panel.spot[t][i].bid) << ','
                << format_double(panel.spot[t][i].ask) << ','
                << format_double(panel.fpts[t][i].bid) << ','
                << format_double(panel.fpts[t][i].ask) << '\n';
        }
    }
    const auto meta = dir / "instruments.csv";
    std::ofstream out(meta);
    if (!out) throw DataError("cannot write " + meta.string());
    out << "symbol,ric,tn_ric,pip_size\n";
    for (const auto& spec : panel.instruments)
        out << spec.symbol << ',' << spec.ric << ',' << spec.tn_ric << ','
            << format_double(spec.pip_size) << '\n';
}

std::vector<InstrumentSpec> load_instrument_specs(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open " + file.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty file " + file.string());
    ++line_no;
    if (split_csv_line(line) != std::vector<std::string>{"symbol", "ric", "tn_ric", "pip_size"})
        throw DataError("bad header in " + file.string() +
                        " (want symbol,ric,tn_ric,pip_size)");
    std::vector<InstrumentSpec> specs;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        const std::string where = file.string() + ":" + std::to_string(line_no);
        if (fields.size() != 4) throw DataError("expected 4 fields at " + where);
        InstrumentSpec spec{fields[0], fields[1], fields[2], parse_double(fields[3], where)};
        spec.validate();
        specs.push_back(std::move(spec));
    }
    if (specs.empty()) throw DataError("no instruments in " + file.string());
    return specs;
}

// --- synthetic panel ---------------------------------------------------------

void SynthInstrumentConfig::validate() const {
    spec.validate();
    if (!(initial_mid > 0.0)) throw ConfigError("initial_mid must be positive: " + spec.symbol);
    if (vol < 0.0) throw ConfigError("volatility must be nonnegative: " + spec.symbol);
    if (rel_spread < 0.0) throw ConfigError("spread must be nonnegative: " + spec.symbol);
    if (jump_intensity < 0.0 || jump_size < 0.0)
        throw ConfigError("jump parameters must be nonnegative: " + spec.symbol);
    if (points_spread < 0.0) throw ConfigError("points spread must be nonnegative: " + spec.symbol);
}

void SynthConfig::validate() const {
    if (n_days < 2) throw ConfigError("synth panel needs at least 2 days");
    if (instruments.empty()) throw ConfigError("synth panel needs at least 1 instrument");
    validate_iso_date(start_date, "synth config");
    for (const auto& inst : instruments) inst.validate();
}

MarketPanel synth_panel(const SynthConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t n = static_cast<std::size_t>(config.n_days);
    const std::size_t k = config.instruments.size();

    MarketPanel panel;
    panel.dates.resize(n);
    panel.dates[0] = config.start_date;
    for (std::size_t t = 1; t < n; ++t) panel.dates[t] = add_days(panel.dates[t - 1], 1);
    for (const auto& inst : config.instruments) panel.instruments.push_back(inst.spec);
    panel.spot.assign(n, std::vector<QuotePair>(k));
    panel.fpts.assign(n, std::vector<ForwardPointsQuote>(k));

    // One independent stream per instrument, derived from the master seed in
    // instrument order, so adding an instrument does not ripple the others.
    Rng master(seed);
    std::vector<std::uint64_t> streams(k);
    for (std::size_t i = 0; i < k; ++i) streams[i] = master.next_u64();

    for (std::size_t i = 0; i < k; ++i) {
        const auto& cfg = config.instruments[i];
        Rng rng(streams[i]);
        double level = cfg.initial_mid;
        for (std::size_t t = 0; t < n; ++t) {
            if (t > 0) {
                double ret = cfg.drift + cfg.vol * rng.normal();
                const int jumps = rng.poisson(cfg.jump_intensity);
                for (int j = 0; j < jumps; ++j) ret += cfg.jump_size * rng.normal();
                if (ret < -0.5) ret = -0.5;  // keep the level positive
                level *= 1.0 + ret;
            }
            const double half = 0.5 * level * cfg.rel_spread;
            panel.spot[t][i] = QuotePair{panel.dates[t], level - half, level + half};
            const double pts = forward_points_mid(level, cfg.e1, cfg.e2, cfg.spec.pip_size);
            panel.fpts[t][i] = ForwardPointsQuote{panel.dates[t], pts - 0.5 * cfg.points_spread,
                                                  pts + 0.5 * cfg.points_spread};
        }
    }
    fill_returns(panel);
    flag_crossed(panel);
    panel.validate();
    return panel;
}

}  // namespace driftfx
