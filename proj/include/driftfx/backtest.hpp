#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "driftfx/agents.hpp"
#include "driftfx/marketdata.hpp"
#include "driftfx/mixture.hpp"

namespace driftfx {

struct HyperParams {
    double decay = 0.99;       // τ everywhere (trainers, moments)
    double ridge = 1.0;        // α precision seed
    double lambda_init = 1.0;
    double lambda_min = 1e-6;
    int k_min = 1;
    int k_max = 25;
    double tol = 1e-6;
    int max_iter = 500;
    double cov_floor = 1e-9;
};

struct BacktestConfig {
    double train_fraction = 1.0 / 3.0;
    std::optional<std::size_t> train_count;  // explicit override of the fraction
    bool costs_enabled = true;
    bool carry_enabled = true;
    std::vector<std::string> strategies = {"carry", "drl", "mom"};
    std::uint64_t seed = 0;
    HyperParams hyper;

    void validate() const;
};

// One (date, instrument, strategy) observation; monetary columns are simple
// returns (price-unit reward divided by the same-day mid), and
// net = gross + cost + carry holds exactly by construction.
struct StepRecord {
    std::string date;
    std::string instrument;
    std::string strategy;
    double position = 0;
    double gross = 0;
    double cost = 0;
    double carry = 0;
    double net = 0;
};

// Describe-style summary of one daily portfolio series.
struct StrategyStats {
    std::size_t count = 0;
    double mean = 0, stddev = 0, min = 0, q25 = 0, q50 = 0, q75 = 0, max = 0, sum = 0;
    std::optional<double> ir;                   // annualized; absent when σ = 0
    std::optional<double> prob_positive_alpha;  // Φ(ir)
    std::optional<double> ann_compound;         // (1+sum)^{252/count} − 1
};

struct PerformanceReport {
    std::vector<std::string> dates;  // test dates, ascending
    std::map<std::string, std::vector<double>> portfolio_net;    // strategy -> daily
    std::map<std::string, std::vector<double>> portfolio_carry;  // strategy -> daily
    std::map<std::string, StrategyStats> net_stats;
    std::map<std::string, StrategyStats> funding_stats;

    json to_json() const;
    std::string render() const;  // text tables (net + funding decomposition)
};

// First ⌈fraction·n⌉ dates train, the rest test; throws ConfigError when a
// part would be empty.
std::pair<std::size_t, std::size_t> split_counts(std::size_t n_dates, double fraction);

StrategyStats performance_stats(const std::vector<double>& daily);

// Daily equal-weight cross-instrument means per strategy, for the net and
// carry columns separately.
struct PortfolioSeries {
    std::vector<std::string> dates;                          // ascending
    std::map<std::string, std::vector<double>> net;    // strategy -> daily
    std::map<std::string, std::vector<double>> carry;  // strategy -> daily
};

// Collapse records to daily portfolio series; every strategy must cover every
// instrument on every date exactly once.
PortfolioSeries aggregate_portfolio(const std::vector<StepRecord>& records);

// Describe the funding (carry) component of each strategy's portfolio series.
std::map<std::string, StrategyStats> decompose_funding(const std::vector<StepRecord>& records);

// Full summary: aggregated series plus describe-style stats for the net and
// funding components of every strategy present in the records.
PerformanceReport build_report(const std::vector<StepRecord>& records);

struct RunResult {
    std::vector<StepRecord> records;  // test dates only
    PerformanceReport report;
    MixtureModel mixture;
    std::vector<int> k_path;
    double message_length = 0;
    std::map<std::string, double> lambdas;  // per-instrument calibrated λ
    std::size_t n_train = 0, n_test = 0;
};

// Walk-forward experiment: fit the feature mixture on the training window
// (unless one is supplied), stream the training pass (λ=1, then calibrated),
// then stream the test window booking records for every active strategy.
RunResult run(const MarketPanel& panel, const BacktestConfig& config,
              const MixtureModel* preset_mixture = nullptr);

// Records CSV (header date,instrument,strategy,position,gross,cost,carry,net),
// shortest-round-trip numbers; read is strict.
void write_records_csv(const std::vector<StepRecord>& records,
                       const std::filesystem::path& path);
std::vector<StepRecord> read_records_csv(const std::filesystem::path& path);

}  // namespace driftfx
