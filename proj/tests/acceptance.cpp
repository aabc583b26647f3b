// Acceptance gate: ten go/no-go checks over the whole library, one line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "driftfx/agents.hpp"
#include "driftfx/backtest.hpp"
#include "driftfx/cli.hpp"
#include "driftfx/errors.hpp"
#include "driftfx/estimators.hpp"
#include "driftfx/marketdata.hpp"
#include "driftfx/mixture.hpp"
#include "driftfx/numeric.hpp"
#include "driftfx/rbf.hpp"
#include "driftfx/rng.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace driftfx;
using Clock = std::chrono::steady_clock;

namespace {

double secs(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

struct Check {
    bool ok = true;
    std::string why;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            why = what;
        }
    }
};

int run_criterion(int id, const char* desc, const std::function<void(Check&)>& body) {
    const auto t0 = Clock::now();
    Check c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.expect(false, std::string("threw: ") + e.what());
    }
    const double dt = secs(t0, Clock::now());
    if (c.ok) {
        std::printf("[PASS] criterion %d: %s (%.2f s)\n", id, desc, dt);
        return 0;
    }
    std::printf("[FAIL] criterion %d: %s -- %s (%.2f s)\n", id, desc, c.why.c_str(), dt);
    return 1;
}

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

// Two-dimensional feature map with four spread-out units (feature dim 6).
RbfNetwork grid_net() {
    MixtureModel model;
    model.dim = 2;
    const double spots[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
    for (const auto& s : spots) {
        Eigen::VectorXd mu(2);
        mu << s[0], s[1];
        model.components.push_back({0.25, mu, Eigen::MatrixXd::Identity(2, 2)});
    }
    return RbfNetwork::from_mixture(model);
}

// One flat feature unit: keeps panels with constant returns away from the
// mixture fitter, which has nothing to estimate on zero-variance data.
MixtureModel unit_mixture() {
    MixtureModel m;
    m.dim = 1;
    m.components = {{1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)}};
    return m;
}

struct StrategySummary {
    double terminal = 0, mean_pos = 0, net_sum = 0, carry_sum = 0;
    int count = 0;
};

StrategySummary summarize(const RunResult& res, const std::string& strategy) {
    StrategySummary s;
    for (const auto& r : res.records) {
        if (r.strategy != strategy) continue;
        s.terminal = r.position;
        s.mean_pos += r.position;
        s.net_sum += r.net;
        s.carry_sum += r.carry;
        ++s.count;
    }
    if (s.count > 0) s.mean_pos /= s.count;
    return s;
}

int quiet_cli(std::initializer_list<std::string> args) {
    std::vector<std::string> owned = {"driftfx"};
    owned.insert(owned.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(owned.size());
    for (const std::string& s : owned) argv.push_back(s.c_str());
    std::ostringstream sink;
    std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
    const int code = run_cli(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old);
    return code;
}

// --- criteria ----------------------------------------------------------------

void c1_streaming_ridge(Check& c) {
    const auto t0 = Clock::now();
    const double alphas[3] = {0.3, 1.0, 2.5};
    for (std::uint64_t s = 1; s <= 20; ++s) {
        Rng rng(1000 + s);
        const Eigen::Index n = 100, d = 1 + static_cast<Eigen::Index>((s - 1) % 5);
        const double alpha = alphas[s % 3];
        Eigen::MatrixXd X(n, d);
        Eigen::VectorXd y(n), w_true(d);
        for (Eigen::Index j = 0; j < d; ++j) w_true(j) = rng.normal();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) X(i, j) = rng.normal();
            y(i) = X.row(i).dot(w_true) + 0.1 * rng.normal();
        }

        EwrlsState plain = EwrlsState::init(d, alpha, 1.0);
        EwrlsState faded = EwrlsState::init(d, alpha, 0.97);
        for (Eigen::Index i = 0; i < n; ++i) {
            plain.step(X.row(i).transpose(), y(i));
            faded.step(X.row(i).transpose(), y(i));
        }

        const double err_plain =
            (plain.weights - oracles::ridge_solve(X, y, alpha)).cwiseAbs().maxCoeff();
        const double err_faded =
            (faded.weights - oracles::ew_ridge_solve(X, y, alpha, 0.97)).cwiseAbs().maxCoeff();
        c.expect(err_plain < 1e-8, "seed " + std::to_string(s) + ": flat-memory mismatch " +
                                       fmt(err_plain) + " vs batch ridge");
        c.expect(err_faded < 1e-8, "seed " + std::to_string(s) + ": faded-memory mismatch " +
                                       fmt(err_faded) + " vs weighted batch ridge");
    }
    const double dt = secs(t0, Clock::now());
    c.expect(dt < 1.0, "took " + fmt(dt) + " s, budget 1 s");
}

void c2_gradient_fd(Check& c) {
    const auto t0 = Clock::now();
    const RbfNetwork net = grid_net();
    const Eigen::Index dim = net.size() + 2;  // m = 4 feature units
    const double tau = 0.95, lambda = 2.0;
    const std::size_t T = 6;
    int accepted = 0;

    for (std::uint64_t trial = 0; trial < 200 && accepted < 20; ++trial) {
        Rng rng(6000 + trial);
        DrlConfig config;
        config.decay = tau;
        config.lambda_init = lambda;
        DrlAgent agent(dim, config);
        for (Eigen::Index i = 0; i < dim; ++i) agent.ekf.weights(i) = 0.5 * rng.normal();
        const Eigen::VectorXd theta = agent.ekf.weights;

        oracles::Episode ep;
        for (std::size_t t = 0; t < T; ++t) {
            StepInputs in;
            in.u = Eigen::VectorXd::NullaryExpr(2, [&](Eigen::Index) { return rng.normal(); });
            in.price_change = 0.05 * rng.normal();
            in.half_spread = rng.uniform(0.001, 0.02);
            in.carry_long = 0.02 * rng.normal();
            in.carry_short = 0.02 * rng.normal();
            ep.inputs.push_back(in);
        }

        // Warm up all but the last bar by hand so the weights never move.
        for (std::size_t t = 0; t + 1 < T; ++t) {
            const StepInputs& in = ep.inputs[t];
            const Eigen::VectorXd x = net.features(in.u, agent.f_prev);
            const double f = drl_position(theta, x);
            const double r = net_reward(f, agent.f_prev, in);
            agent.moments.update(r);
            const auto der = agent.gradient(x, in, r);
            agent.d_prev2 = agent.d_prev;
            agent.d_prev = der.d_t;
            agent.f_prev2 = agent.f_prev;
            agent.f_prev = f;
            agent.x_prev = x;
        }

        const double mu0 = agent.moments.mean;
        const double var0 = agent.moments.variance;
        const StepInputs& fin = ep.inputs[T - 1];
        const Eigen::VectorXd x_t = net.features(fin.u, agent.f_prev);
        const double f_t = drl_position(theta, x_t);
        const double r_t = net_reward(f_t, agent.f_prev, fin);
        // skip states next to the |f_t - f_prev| cost kink or the funding-side flip
        if (std::abs(f_t - agent.f_prev) < 1e-3 || std::abs(f_t) < 1e-3) continue;
        const double mu_hat = tau * mu0 + (1.0 - tau) * r_t;
        agent.moments.update(r_t);
        const Eigen::VectorXd grad = agent.gradient(x_t, fin, r_t).grad;

        const double eps = 1e-6;
        Eigen::VectorXd fd(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            Eigen::VectorXd up = theta, down = theta;
            up(i) += eps;
            down(i) -= eps;
            fd(i) = (oracles::replay_utility(net, up, ep, tau, lambda, mu0, var0, mu_hat) -
                     oracles::replay_utility(net, down, ep, tau, lambda, mu0, var0, mu_hat)) /
                    (2.0 * eps);
        }
        const double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
        const double rel = (grad - fd).cwiseAbs().maxCoeff() / scale;
        c.expect(rel < 1e-5,
                 "state " + std::to_string(trial) + ": relative error " + fmt(rel));
        ++accepted;
    }
    c.expect(accepted == 20, "only " + std::to_string(accepted) + " smooth states found");
    const double dt = secs(t0, Clock::now());
    c.expect(dt < 1.0, "took " + fmt(dt) + " s, budget 1 s");
}

void c3_kalman_steps(Check& c) {
    Eigen::VectorXd g1 = Eigen::VectorXd::Ones(1);

    EkfState flat = EkfState::init(1, 1.0, 1.0);
    c.expect(flat.step(g1), "flat-memory step rejected");
    c.expect(std::abs(flat.weights(0) - 0.5) < 1e-12,
             "flat weight " + fmt(flat.weights(0)) + " != 0.5");
    c.expect(std::abs(flat.cov(0, 0) - 0.5) < 1e-12,
             "flat covariance " + fmt(flat.cov(0, 0)) + " != 0.5");

    EkfState faded = EkfState::init(1, 1.0, 0.99);
    c.expect(faded.step(g1), "faded-memory step rejected");
    c.expect(std::abs(faded.weights(0) - 1.0 / 1.99) < 1e-12,
             "faded weight " + fmt(faded.weights(0)) + " != 1/1.99");
    c.expect(std::abs(faded.cov(0, 0) - 1.0 / 1.99) < 1e-12,
             "faded covariance " + fmt(faded.cov(0, 0)) + " != 1/1.99");

    Rng rng(321);
    EkfState s = EkfState::init(8, 1.0, 0.99);
    for (int t = 0; t < 10000; ++t) {
        Eigen::VectorXd g(8);
        for (int i = 0; i < 8; ++i) g(i) = rng.uniform(-1.0, 1.0);
        c.expect(s.step(g), "step " + std::to_string(t) + " rejected");
        if (!oracles::bit_equal(s.cov, s.cov.transpose())) {
            c.expect(false, "covariance asymmetric at step " + std::to_string(t));
            return;
        }
        if (t % 100 == 0 || t == 9999) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.cov);
            if (eig.eigenvalues().minCoeff() <= 0.0) {
                c.expect(false, "covariance lost positive definiteness at step " +
                                    std::to_string(t));
                return;
            }
        }
    }
}

void c4_em_monotone(Check& c) {
    std::vector<Eigen::VectorXd> centers(3, Eigen::VectorXd::Zero(2));
    centers[1] << 3.0, 0.0;
    centers[2] << 0.0, 3.0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        Rng rng(s);
        const Eigen::MatrixXd data = oracles::gen_clusters(rng, 240, centers, 0.5);
        MixtureFitConfig cfg;
        cfg.seed = s;
        const EmResult res = em_fit(data, 3, cfg);
        c.expect(res.ll_trace.size() >= 2, "seed " + std::to_string(s) + ": trace too short");
        for (std::size_t i = 1; i < res.ll_trace.size(); ++i)
            c.expect(res.ll_trace[i] >= res.ll_trace[i - 1] - 1e-10,
                     "seed " + std::to_string(s) + ": log-likelihood dropped " +
                         fmt(res.ll_trace[i - 1]) + " -> " + fmt(res.ll_trace[i]) +
                         " at iteration " + std::to_string(i));
    }
}

void c5_annihilation(Check& c) {
    const auto t0 = Clock::now();
    std::vector<Eigen::VectorXd> centers(3, Eigen::VectorXd::Zero(2));
    centers[1] << 3.0, 0.0;  // 10 sigma apart at sigma = 0.3
    centers[2] << 0.0, 3.0;

    int hits = 0;
    double worst_dev = 0.0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        Rng rng(s);
        const Eigen::MatrixXd data = oracles::gen_clusters(rng, 800, centers, 0.3);
        MixtureFitConfig cfg;
        cfg.k_max = 10;
        cfg.cov_floor = 1e-2;  // forbid components much tighter than a cluster
        cfg.seed = s;
        const FjResult res = fj_fit(data, cfg);
        if (res.model.size() == 3) ++hits;
        worst_dev = std::max(worst_dev, res.max_weight_sum_dev);
    }
    c.expect(hits >= 19, "recovered k=3 in only " + std::to_string(hits) + "/20 seeds");
    c.expect(worst_dev <= 1e-9, "weight sums drifted by " + fmt(worst_dev));
    const double dt = secs(t0, Clock::now());
    c.expect(dt < 30.0, "took " + fmt(dt) + " s, budget 30 s");
}

void c6_fx_mechanics(Check& c) {
    const InstrumentSpec major{"MAJOR4", "MAJOR4=", "MAJOR4TN=", 1e-4};
    const QuotePair spot_a{"2020-01-02", 1.30000, 1.30010};
    const ForwardPointsQuote pts_a{"2020-01-02", -0.5, -0.3};
    const TomnextOutright tn_a = tomnext_outright(spot_a, pts_a, major);
    c.expect(tn_a.bid == 1.30000 + (-0.3) * 1e-4, "outright bid " + fmt(tn_a.bid));
    c.expect(tn_a.ask == 1.30010 + (-0.5) * 1e-4, "outright ask " + fmt(tn_a.ask));
    const CarryRates rates_a = carry_rates(spot_a, tn_a);
    c.expect(rates_a.long_rate == 1.30000 - (1.30010 + (-0.5) * 1e-4),
             "long carry " + fmt(rates_a.long_rate));
    c.expect(rates_a.short_rate == (1.30000 + (-0.3) * 1e-4) - 1.30010,
             "short carry " + fmt(rates_a.short_rate));

    // high-yield quote: large positive points make the SHORT side the payer
    const InstrumentSpec rubbish{"HIYLD2", "HIYLD2=", "HIYLD2TN=", 0.01};
    const QuotePair spot_b{"2020-01-02", 70.00, 70.02};
    const ForwardPointsQuote pts_b{"2020-01-02", 10.0, 12.0};
    const TomnextOutright tn_b = tomnext_outright(spot_b, pts_b, rubbish);
    c.expect(tn_b.bid == 70.00 + 12.0 * 0.01, "outright bid " + fmt(tn_b.bid));
    c.expect(tn_b.ask == 70.02 + 10.0 * 0.01, "outright ask " + fmt(tn_b.ask));
    const CarryRates rates_b = carry_rates(spot_b, tn_b);
    c.expect(rates_b.long_rate == 70.00 - (70.02 + 10.0 * 0.01),
             "long carry " + fmt(rates_b.long_rate));
    c.expect(rates_b.short_rate == (70.00 + 12.0 * 0.01) - 70.02,
             "short carry " + fmt(rates_b.short_rate));
    c.expect(rates_b.short_rate > 0.0, "short side should pay on this quote");
    c.expect(carry_position(rates_b) == -1.0, "funding trader should be short here");

    Rng rng(77);
    for (int trial = 0; trial < 10000; ++trial) {
        const double bid = rng.uniform(0.5, 150.0);
        const QuotePair spot{"2020-01-02", bid, bid + rng.uniform(0.0, 0.1)};
        const double pts_bid = rng.uniform(-50.0, 50.0);
        const ForwardPointsQuote pts{"2020-01-02", pts_bid, pts_bid + rng.uniform(0.0, 20.0)};
        const CarryRates rates = carry_rates(spot, tomnext_outright(spot, pts, major));
        const double f = carry_position(rates);
        if (rates.long_rate <= 0.0 && rates.short_rate <= 0.0) {
            if (f != 0.0) {
                c.expect(false, "traded a quote where no side pays (tuple " +
                                    std::to_string(trial) + ")");
                return;
            }
        } else if (f > 0.0 ? rates.long_rate <= 0.0
                           : (f < 0.0 && rates.short_rate <= 0.0)) {
            c.expect(false, "traded the losing side (tuple " + std::to_string(trial) + ")");
            return;
        }
    }
}

void c7_economic_sanity(Check& c) {
    const MixtureModel preset = unit_mixture();

    {  // (a) noiseless uptrend, frictionless: ride the trend to full size
        const auto t0 = Clock::now();
        SynthConfig cfg;
        cfg.start_date = "2012-01-02";
        cfg.n_days = 1200;
        SynthInstrumentConfig inst;
        inst.spec = {"UPTREND", "UPTREND=", "UPTRENDTN=", 1e-4};
        inst.drift = 0.004;
        cfg.instruments = {inst};
        const MarketPanel panel = synth_panel(cfg, 1);
        BacktestConfig bc;
        bc.strategies = {"drl"};
        bc.costs_enabled = false;
        bc.carry_enabled = false;
        const StrategySummary s = summarize(run(panel, bc, &preset), "drl");
        c.expect(std::abs(s.terminal - 1.0) <= 0.05,
                 "(a) terminal position " + fmt(s.terminal) + " not within 0.05 of +1");
        c.expect(s.net_sum > 0.0, "(a) cumulative net " + fmt(s.net_sum) + " not positive");
        const double dt = secs(t0, Clock::now());
        c.expect(dt < 10.0, "(a) took " + fmt(dt) + " s, budget 10 s");
    }

    {  // (b) zero drift, short side pays: learner shorts and out-earns momentum
        const auto t0 = Clock::now();
        SynthConfig cfg;
        cfg.start_date = "2012-01-02";
        cfg.n_days = 1400;
        SynthInstrumentConfig inst;
        inst.spec = {"ROLLPAY", "ROLLPAY=", "ROLLPAYTN=", 0.01};
        inst.initial_mid = 70.0;
        inst.vol = 0.004;
        inst.rel_spread = 1e-4;
        inst.e2 = 0.18;  // positive short carry of about 5e-4/day
        inst.points_spread = 0.05;
        cfg.instruments = {inst};
        const MarketPanel panel = synth_panel(cfg, 2);
        BacktestConfig bc;
        bc.seed = 2;
        bc.hyper.k_max = 3;
        const RunResult res = run(panel, bc);
        const StrategySummary drl = summarize(res, "drl");
        const StrategySummary mom = summarize(res, "mom");
        c.expect(drl.mean_pos < 0.0, "(b) mean position " + fmt(drl.mean_pos) + " not short");
        c.expect(drl.carry_sum >= mom.carry_sum,
                 "(b) funding capture " + fmt(drl.carry_sum) + " < momentum's " +
                     fmt(mom.carry_sum));
        const double dt = secs(t0, Clock::now());
        c.expect(dt < 10.0, "(b) took " + fmt(dt) + " s, budget 10 s");
    }

    {  // (c) uptrend with stronger opposing carry: friction decides the side
        const auto t0 = Clock::now();
        SynthConfig cfg;
        cfg.start_date = "2012-01-02";
        cfg.n_days = 1400;
        SynthInstrumentConfig inst;
        inst.spec = {"TUGOWAR", "TUGOWAR=", "TUGOWARTN=", 0.01};
        inst.initial_mid = 70.0;
        inst.drift = 3e-4;       // gentle climb favors being long...
        inst.rel_spread = 2e-4;
        inst.e2 = 0.25;          // ...but holding long bleeds twice as much carry
        inst.points_spread = 0.02;
        cfg.instruments = {inst};
        const MarketPanel panel = synth_panel(cfg, 3);
        BacktestConfig with;
        with.strategies = {"drl"};
        BacktestConfig without = with;
        without.costs_enabled = false;
        without.carry_enabled = false;
        const double pos_with = summarize(run(panel, with, &preset), "drl").mean_pos;
        const double pos_without = summarize(run(panel, without, &preset), "drl").mean_pos;
        c.expect(pos_with < 0.0 && pos_without > 0.0,
                 "(c) mean positions " + fmt(pos_with) + " / " + fmt(pos_without) +
                     " not opposite-signed");
        const double dt = secs(t0, Clock::now());
        c.expect(dt < 10.0, "(c) took " + fmt(dt) + " s, budget 10 s");
    }
}

void c8_normal_cdf(Check& c) {
    c.expect(std::abs(normal_cdf(0.518) - 0.6977) <= 5e-4,
             "cdf(0.518) = " + fmt(normal_cdf(0.518)));
    c.expect(std::abs(normal_cdf(0.403) - 0.6565) <= 5e-4,
             "cdf(0.403) = " + fmt(normal_cdf(0.403)));
}

void c9_determinism(Check& c) {
    testutil::TempDir dir("acceptance");
    const std::string spec = R"({
      "start_date": "2014-02-03",
      "n_days": 160,
      "instruments": [
        {"symbol": "AAABBB", "initial_mid": 1.2, "drift": 0.0001, "vol": 0.005,
         "rel_spread": 0.0001, "e2": 0.02, "points_spread": 0.03},
        {"symbol": "CCCDDD", "initial_mid": 55.0, "pip_size": 0.01, "drift": 0.0003,
         "vol": 0.009, "jump_intensity": 0.05, "jump_size": 0.02,
         "rel_spread": 0.0003, "e1": 0.01, "e2": 0.08, "points_spread": 0.05}
      ]
    })";
    testutil::write_file(dir.file("spec.json"), spec);

    auto end_to_end = [&](const std::string& tag) {
        const auto panel = dir.file("panel-" + tag);
        const auto out = dir.file("run-" + tag);
        if (quiet_cli({"synth", "--config", dir.file("spec.json").string(), "--out-dir",
                       panel.string(), "--seed", "17"}) != 0)
            return false;
        return quiet_cli({"backtest", "--data-dir", panel.string(), "--out-dir", out.string(),
                          "--seed", "17", "--k-max", "3"}) == 0;
    };
    c.expect(end_to_end("a"), "first end-to-end run failed");
    c.expect(end_to_end("b"), "second end-to-end run failed");
    if (!c.ok) return;

    for (const char* name :
         {"panel-a/AAABBB.csv", "panel-a/CCCDDD.csv", "panel-a/instruments.csv",
          "panel-a/manifest.json", "run-a/records.csv", "run-a/report.json",
          "run-a/report.txt", "run-a/mixture.json", "run-a/run_meta.json",
          "run-a/cumret_drl.csv"}) {
        std::string other = name;
        other.replace(other.find('-') + 1, 1, "b");
        if (testutil::read_file(dir.file(name)) != testutil::read_file(dir.file(other))) {
            c.expect(false, std::string("reruns differ at ") + name);
            return;
        }
    }

    // report rebuilt from the records alone must be the same bytes
    const auto rebuilt = dir.file("rebuilt");
    c.expect(quiet_cli({"report", "--records", dir.file("run-a/records.csv").string(),
                        "--out-dir", rebuilt.string()}) == 0,
             "report rebuild failed");
    c.expect(testutil::read_file(rebuilt / "report.json") ==
                 testutil::read_file(dir.file("run-a/report.json")),
             "rebuilt report.json differs");
    c.expect(testutil::read_file(rebuilt / "report.txt") ==
                 testutil::read_file(dir.file("run-a/report.txt")),
             "rebuilt report.txt differs");

    // no lookahead: dropping unseen future days must not change earlier records
    SynthConfig cfg;
    cfg.start_date = "2014-02-03";
    cfg.n_days = 90;
    SynthInstrumentConfig inst;
    inst.spec = {"AAABBB", "AAABBB=", "AAABBBTN=", 1e-4};
    inst.initial_mid = 1.2;
    inst.drift = 1e-4;
    inst.vol = 0.005;
    inst.rel_spread = 1e-4;
    inst.e2 = 0.02;
    inst.points_spread = 0.03;
    cfg.instruments = {inst};
    const MarketPanel panel = synth_panel(cfg, 5);
    BacktestConfig bc;
    bc.seed = 5;
    bc.train_count = 30;
    bc.hyper.k_max = 3;
    const RunResult full = run(panel, bc);

    MarketPanel shorter = panel;
    shorter.dates.resize(70);
    shorter.spot.resize(70);
    shorter.fpts.resize(70);
    shorter.returns = panel.returns.topRows(70).eval();
    const RunResult prefix = run(shorter, bc);

    c.expect(prefix.records.size() == 40 * 3, "prefix record count off");
    for (std::size_t i = 0; i < prefix.records.size() && c.ok; ++i) {
        const StepRecord& p = prefix.records[i];
        const StepRecord& f = full.records[i];
        c.expect(p.date == f.date && p.instrument == f.instrument &&
                     p.strategy == f.strategy && p.position == f.position &&
                     p.gross == f.gross && p.cost == f.cost && p.carry == f.carry &&
                     p.net == f.net,
                 "record " + std::to_string(i) + " changed when the future was truncated");
    }
}

void c10_scale(Check& c) {
    const auto t0 = Clock::now();
    SynthConfig cfg;
    cfg.start_date = "2010-12-07";
    cfg.n_days = 2840;
    for (int i = 0; i < 36; ++i) {
        SynthInstrumentConfig inst;
        char sym[8];
        std::snprintf(sym, sizeof(sym), "FX%02dXX", i);
        inst.spec = {sym, std::string(sym) + "=", std::string(sym) + "TN=",
                     (i % 4 == 0) ? 0.01 : 1e-4};
        inst.initial_mid = (i % 4 == 0) ? 30.0 + i : 0.8 + 0.05 * i;
        inst.drift = ((i % 7) - 3) * 1e-4;
        inst.vol = 0.003 + 0.0004 * (i % 9);
        inst.jump_intensity = 0.02 * (i % 3);
        inst.jump_size = 0.01;
        inst.rel_spread = 1e-4 + 2e-5 * (i % 5);
        inst.e1 = 0.01 * (i % 5);
        inst.e2 = 0.01 * ((i + 2) % 7);
        inst.points_spread = 0.02 + 0.01 * (i % 3);
        cfg.instruments.push_back(inst);
    }
    const MarketPanel panel = synth_panel(cfg, 99);
    BacktestConfig bc;
    bc.seed = 99;
    const RunResult res = run(panel, bc);
    c.expect(res.records.size() == res.n_test * 36 * 3,
             "record count " + std::to_string(res.records.size()));
    c.expect(res.report.net_stats.size() == 3, "report missing strategies");
    const double dt = secs(t0, Clock::now());
    c.expect(dt < 60.0, "took " + fmt(dt) + " s, budget 60 s");
}

}  // namespace

int main() {
    int failures = 0;
    failures += run_criterion(1, "streaming least squares matches batch ridge solutions",
                              c1_streaming_ridge);
    failures += run_criterion(2, "recurrent utility gradient matches finite differences",
                              c2_gradient_fd);
    failures += run_criterion(3, "Kalman trainer hand steps and covariance health",
                              c3_kalman_steps);
    failures += run_criterion(4, "mixture EM log-likelihood never decreases", c4_em_monotone);
    failures += run_criterion(5, "component annihilation recovers the planted cluster count",
                              c5_annihilation);
    failures += run_criterion(6, "funding mechanics match hand values and never pay to roll",
                              c6_fx_mechanics);
    failures += run_criterion(7, "trend capture, funding capture, and cost-driven side flips",
                              c7_economic_sanity);
    failures += run_criterion(8, "normal CDF anchor points", c8_normal_cdf);
    failures += run_criterion(9, "bit-exact reruns, report rebuild, no-lookahead prefix",
                              c9_determinism);
    failures += run_criterion(10, "full-scale synthetic experiment inside the time budget",
                              c10_scale);
    if (failures > 0) std::printf("%d of 10 criteria failed\n", failures);
    return failures;
}
