#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace driftfx {

// --- instrument & quote types ------------------------------------------------

struct InstrumentSpec {
    std::string symbol;   // e.g. "EURUSD"
    std::string ric;      // spot quote code
    std::string tn_ric;   // tomorrow/next forward-points quote code
    double pip_size = 0;  // price units per forward point

    void validate() const;  // throws ConfigError
};

// Two-sided quote in price units. `date` is an ISO-8601 day stamp.
struct QuotePair {
    std::string date;
    double bid = 0;
    double ask = 0;
};

// Two-sided forward-points quote, in points (multiply by pip_size for price).
struct ForwardPointsQuote {
    std::string date;
    double bid = 0;
    double ask = 0;
};

// Derived tomorrow/next outright; values only.
struct TomnextOutright {
    double bid = 0;
    double ask = 0;
};

// Overnight funding earned per unit of position held, in price units.
// `long_rate` accrues to f > 0, `short_rate` to f < 0; both usually negative
// (you pay the roll), but high-differential pairs can show a positive side.
struct CarryRates {
    double long_rate = 0;
    double short_rate = 0;
};

double mid(const QuotePair& q);
double half_spread(const QuotePair& q);  // max(0.5*(ask-bid), 0)

// Outright = spot + points*pip, with sides crossed so each outright side is
// the cost-bearing combination: outright bid uses the points ask and vice
// versa. Throws DataError when the two quotes carry different dates.
TomnextOutright tomnext_outright(const QuotePair& spot, const ForwardPointsQuote& points,
                                 const InstrumentSpec& spec);

// long = spot bid - outright ask ; short = outright bid - spot ask.
CarryRates carry_rates(const QuotePair& spot, const TomnextOutright& outright);

// mid_t / mid_prev - 1. Throws NumericError on nonpositive mids.
double simple_return(double mid_t, double mid_prev);

// Forward-points mid implied by deposit rates e1 (base) and e2 (quote) for a
// one-day horizon: mid_spot * (e2 - e1) / (360 * pip_size).
double forward_points_mid(double mid_spot, double e1, double e2, double pip_size);

// --- panel -------------------------------------------------------------------

// Date-aligned grids over one or more instruments. Row t of `returns` holds
// each instrument's simple mid-to-mid return at date t (row 0 is zero).
struct MarketPanel {
    std::vector<std::string> dates;  // strictly increasing ISO days
    std::vector<InstrumentSpec> instruments;
    std::vector<std::vector<QuotePair>> spot;           // [date][instrument]
    std::vector<std::vector<ForwardPointsQuote>> fpts;  // [date][instrument]
    Eigen::MatrixXd returns;                            // n_dates x n_instruments
    std::vector<std::string> warnings;  // crossed quotes, dropped dates, ...

    std::size_t n_dates() const { return dates.size(); }
    std::size_t n_instruments() const { return instruments.size(); }

    void validate() const;  // throws DataError on broken alignment
};

// Reads one CSV per instrument (header date,bid_spot,ask_spot,bid_fpts,ask_fpts)
// and intersects dates across instruments. Empty cells drop that date
// panel-wide (flagged); malformed cells raise DataError naming file and line.
MarketPanel load_panel(const std::vector<std::filesystem::path>& files,
                       const std::vector<InstrumentSpec>& specs);

// Writes per-instrument `<symbol>.csv` plus `instruments.csv` metadata
// (header symbol,ric,tn_ric,pip_size). Numbers are shortest-round-trip text,
// so load_panel(write_panel(p)) reproduces p exactly.
void write_panel(const MarketPanel& panel, const std::filesystem::path& dir);

// Reads the `instruments.csv` metadata written by write_panel.
std::vector<InstrumentSpec> load_instrument_specs(const std::filesystem::path& file);

// --- synthetic panel ---------------------------------------------------------

struct SynthInstrumentConfig {
    InstrumentSpec spec;
    double initial_mid = 1.0;
    double drift = 0.0;           // per-day simple-return drift
    double vol = 0.0;             // per-day return volatility
    double jump_intensity = 0.0;  // expected jumps per day
    double jump_size = 0.0;       // return stddev per jump
    double rel_spread = 0.0;      // (ask-bid)/mid
    double e1 = 0.0;              // base-currency deposit rate
    double e2 = 0.0;              // quote-currency deposit rate
    double points_spread = 0.0;   // ask-bid of the points quote, in points

    void validate() const;  // throws ConfigError (negative vol/spread/...)
};

struct SynthConfig {
    std::string start_date = "2010-12-07";
    int n_days = 0;
    std::vector<SynthInstrumentConfig> instruments;

    void validate() const;
};

// Spot mids follow drift + Gaussian noise + Poisson jumps; forward points
// from the configured rate differential. Same seed + config => same panel.
MarketPanel synth_panel(const SynthConfig& config, std::uint64_t seed);

// --- dates -------------------------------------------------------------------

// "YYYY-MM-DD" checks; throws DataError naming `where` on violation.
void validate_iso_date(const std::string& date, const std::string& where);

// date + n calendar days, proleptic Gregorian.
std::string add_days(const std::string& date, int n);

}  // namespace driftfx
