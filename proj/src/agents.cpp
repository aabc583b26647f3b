#include "driftfx/agents.hpp"

#include <cmath>

#include "driftfx/errors.hpp"
#include "driftfx/log.hpp"
#include "driftfx/numeric.hpp"

namespace driftfx {

double carry_pnl(double position, double carry_long, double carry_short) {
    return position >= 0.0 ? carry_long * position : carry_short * (-position);
}

double net_reward(double f_t, double f_prev, const StepInputs& in) {
    if (in.half_spread < 0.0) throw ConfigError("half_spread must be nonnegative");
    return in.price_change * f_prev - in.half_spread * std::abs(f_t - f_prev) +
           carry_pnl(f_t, in.carry_long, in.carry_short);
}

double drl_position(const Eigen::VectorXd& theta, const Eigen::VectorXd& x) {
    if (theta.size() != x.size()) throw ConfigError("position dimension mismatch");
    return std::tanh(theta.dot(x));
}

double carry_position(const CarryRates& rates) {
    if (rates.long_rate > 0.0 || rates.short_rate > 0.0)
        return sign(rates.long_rate - rates.short_rate);
    return 0.0;
}

double calibrate_lambda(const std::vector<double>& rewards, double lambda_min) {
    if (rewards.size() < 2) {
        log_warn("lambda calibration: too few rewards, using floor");
        return lambda_min;
    }
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    double ss = 0.0;
    for (double r : rewards) ss += (r - mean) * (r - mean);
    const double stddev = std::sqrt(ss / static_cast<double>(rewards.size() - 1));
    if (!(stddev > 0.0)) {
        log_warn("lambda calibration: degenerate reward stream, using floor");
        return lambda_min;
    }
    return risk_appetite(mean, stddev, lambda_min);
}

// --- DrlAgent -------------------------------------------------------------------

DrlAgent::DrlAgent(Eigen::Index feature_dim, const DrlConfig& config)
    : ekf(EkfState::init(feature_dim, config.ridge, config.decay)),
      lambda(config.lambda_init),
      lambda_min(config.lambda_min),
      d_prev(Eigen::VectorXd::Zero(feature_dim)),
      d_prev2(Eigen::VectorXd::Zero(feature_dim)),
      x_prev(Eigen::VectorXd::Zero(feature_dim)) {
    if (feature_dim < 2) throw ConfigError("recurrent features need bias and recurrent slots");
    moments.decay = config.decay;
}

DrlAgent::Derivatives DrlAgent::gradient(const Eigen::VectorXd& x_t, const StepInputs& in,
                                         double r_t) const {
    const Eigen::VectorXd& theta = ekf.weights;
    if (x_t.size() != theta.size()) throw ConfigError("gradient dimension mismatch");

    const double f_t = std::tanh(theta.dot(x_t));
    const double slope = 1.0 - f_t * f_t;                  // tanh'
    const double theta_rec = theta(theta.size() - 1);      // recurrent-slot weight
    const double trade_sign = sign(f_t - f_prev);

    Derivatives d;
    d.d_t = slope * (x_t + theta_rec * d_prev);
    d.dr_df_t = -in.half_spread * trade_sign +
                (f_t >= 0.0 ? in.carry_long : -in.carry_short);
    d.dr_df_prev = in.price_change + in.half_spread * trade_sign;
    const double tau = moments.decay;
    d.dv_dr = (1.0 - tau) * (1.0 - lambda * (r_t - moments.mean));
    d.grad = d.dv_dr * (d.dr_df_t * d.d_t + d.dr_df_prev * d_prev);
    return d;
}

DrlAgent::Outcome DrlAgent::step(const RbfNetwork& net, const StepInputs& in) {
    const Eigen::VectorXd x_t = net.features(in.u, f_prev);
    const double f_t = drl_position(ekf.weights, x_t);

    Outcome out;
    out.position = f_t;
    out.gross = in.price_change * f_prev;
    out.cost = -in.half_spread * std::abs(f_t - f_prev);
    out.carry = carry_pnl(f_t, in.carry_long, in.carry_short);
    out.net = out.gross + out.cost + out.carry;

    moments.update(out.net);
    const Derivatives d = gradient(x_t, in, out.net);
    out.stepped = ekf.step(d.grad);
    if (!out.stepped) log_warn("EKF step rejected a non-finite gradient");

    f_prev2 = f_prev;
    f_prev = f_t;
    d_prev2 = d_prev;
    d_prev = d.d_t;
    x_prev = x_t;
    return out;
}

json DrlAgent::snapshot() const {
    return json{{"ekf", ekf.snapshot()},
                {"moments", json{{"mean", moments.mean},
                                 {"variance", moments.variance},
                                 {"decay", moments.decay}}},
                {"lambda", lambda},
                {"lambda_min", lambda_min},
                {"f_prev", f_prev},
                {"f_prev2", f_prev2},
                {"d_prev", vec_to_json(d_prev)},
                {"d_prev2", vec_to_json(d_prev2)},
                {"x_prev", vec_to_json(x_prev)}};
}

DrlAgent DrlAgent::restore(const json& j) {
    EkfState ekf = EkfState::restore(j.at("ekf"));
    DrlConfig config;
    config.decay = ekf.decay;
    config.ridge = ekf.ridge;
    config.lambda_init = j.at("lambda").get<double>();
    config.lambda_min = j.at("lambda_min").get<double>();
    DrlAgent agent(ekf.weights.size(), config);
    agent.ekf = std::move(ekf);
    agent.moments.mean = j.at("moments").at("mean").get<double>();
    agent.moments.variance = j.at("moments").at("variance").get<double>();
    agent.moments.decay = j.at("moments").at("decay").get<double>();
    agent.f_prev = j.at("f_prev").get<double>();
    agent.f_prev2 = j.at("f_prev2").get<double>();
    agent.d_prev = vec_from_json(j.at("d_prev"));
    agent.d_prev2 = vec_from_json(j.at("d_prev2"));
    agent.x_prev = vec_from_json(j.at("x_prev"));
    return agent;
}

// --- MomentumAgent -----------------------------------------------------------------

MomentumAgent::MomentumAgent(Eigen::Index n_units, double ridge, double decay)
    : ewrls(EwrlsState::init(n_units + 1, ridge, decay)) {
    if (n_units < 1) throw ConfigError("momentum needs at least one feature unit");
}

double MomentumAgent::step(const RbfNetwork& net, const Eigen::VectorXd& u, double y_t) {
    if (has_prev) ewrls.step(x_prev, y_t);  // learn previous features -> today's return
    Eigen::VectorXd x_t(net.size() + 1);
    x_t(0) = 1.0;
    x_t.segment(1, net.size()) = net.activations(u);
    const double forecast = ewrls.predict(x_t);
    x_prev = x_t;
    has_prev = true;
    return sign(forecast);
}

json MomentumAgent::snapshot() const {
    return json{{"ewrls", ewrls.snapshot()},
                {"x_prev", vec_to_json(x_prev)},
                {"has_prev", has_prev}};
}

MomentumAgent MomentumAgent::restore(const json& j) {
    EwrlsState state = EwrlsState::restore(j.at("ewrls"));
    MomentumAgent agent(state.weights.size() - 1, state.ridge, state.decay);
    agent.ewrls = std::move(state);
    agent.x_prev = vec_from_json(j.at("x_prev"));
    agent.has_prev = j.at("has_prev").get<bool>();
    return agent;
}

}  // namespace driftfx
