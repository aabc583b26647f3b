#pragma once

#include <Eigen/Dense>
#include <vector>

#include "driftfx/estimators.hpp"
#include "driftfx/marketdata.hpp"
#include "driftfx/rbf.hpp"

namespace driftfx {

// Everything a strategy may look at on one bar, in price units. When trading
// costs or funding are disabled upstream, the corresponding fields arrive as
// zero — agents never peek past what they are given.
struct StepInputs {
    Eigen::VectorXd u;        // cross-sectional return vector for the bar
    double price_change = 0;  // Δp: mid_t - mid_{t-1}
    double half_spread = 0;   // δ ≥ 0
    double carry_long = 0;    // κ_long: funding per unit of long held overnight
    double carry_short = 0;   // κ_short: funding per unit of short
};

// Funding earned by position f: κ_long·f for f ≥ 0, κ_short·(−f) for f < 0.
double carry_pnl(double position, double carry_long, double carry_short);

// One-bar net reward: r = Δp·f_prev − δ|f_t − f_prev| + carry(f_t).
// f_prev earns the price move; f_t pays the trade and earns the overnight roll.
double net_reward(double f_t, double f_prev, const StepInputs& in);

// Bounded position tanh(θᵀx).
double drl_position(const Eigen::VectorXd& theta, const Eigen::VectorXd& x);

// Deterministic funding capture: trade only when some side of the roll pays,
// in the direction of the better side; otherwise abstain.
double carry_position(const CarryRates& rates);

// Sample-moment risk-appetite calibration over a training reward stream:
// λ = max(ir/σ, lambda_min) with non-annualized ir = μ/σ. Degenerate streams
// (fewer than 2 points or zero dispersion) fall back to lambda_min.
double calibrate_lambda(const std::vector<double>& rewards, double lambda_min);

// --- recurrent reinforcement trader ----------------------------------------------
//
// Position f_t = tanh(θᵀx_t) on the recurrent features x_t = [1, φ(u), f_prev].
// Weights ascend the risk-adjusted utility υ = μ − (λ/2)σ² of the reward
// stream via the EKF trainer. The recurrent total derivative
//   D_t = ∂f_t/∂θ + (∂f_t/∂f_prev)·D_prev
// carries one step of position memory, and the utility gradient combines the
// reward's direct and held-over position sensitivities:
//   ∇υ = (1−τ)(1 − λ(r_t − μ_t)) · [ (∂r/∂f_t)·D_t + (∂r/∂f_prev)·D_prev ].
struct DrlConfig {
    double decay = 0.99;      // τ for EKF and moving moments
    double ridge = 1.0;       // α: EKF precision seed
    double lambda_init = 1.0;
    double lambda_min = 1e-6;
};

class DrlAgent {
  public:
    DrlAgent(Eigen::Index feature_dim, const DrlConfig& config);

    struct Derivatives {
        Eigen::VectorXd grad;   // ∇υ_t
        Eigen::VectorXd d_t;    // updated recurrent derivative
        double dv_dr = 0;       // ∂υ/∂r
        double dr_df_t = 0;     // ∂r/∂f_t   (trade cost + funding side)
        double dr_df_prev = 0;  // ∂r/∂f_prev (price move + trade cost)
    };

    // Utility gradient at features x_t with realized reward r_t; reads the
    // already-updated moving mean. Pure with respect to the learning state.
    Derivatives gradient(const Eigen::VectorXd& x_t, const StepInputs& in, double r_t) const;

    struct Outcome {
        double position = 0;  // f_t
        double gross = 0, cost = 0, carry = 0, net = 0;  // price units
        bool stepped = true;  // false when the EKF rejected the gradient
    };

    // Full bar update: features -> position -> reward -> moments -> gradient
    // -> EKF step -> state roll.
    Outcome step(const RbfNetwork& net, const StepInputs& in);

    json snapshot() const;
    static DrlAgent restore(const json& j);

    // Learning state (exposed: single-owner mutable value, tests poke it).
    EkfState ekf;
    MovingMoments moments;
    double lambda = 1.0;
    double lambda_min = 1e-6;
    double f_prev = 0.0, f_prev2 = 0.0;
    Eigen::VectorXd d_prev, d_prev2;  // D_{t-1}, D_{t-2}
    Eigen::VectorXd x_prev;
};

// --- trend-following baseline ------------------------------------------------------
//
// Exponentially weighted RLS one-step-ahead return forecast on [1, φ(u)]
// (no recurrent slot); trades sign(ŷ) ∈ {−1, 0, +1}.
class MomentumAgent {
  public:
    MomentumAgent(Eigen::Index n_units, double ridge, double decay);

    // Learn from (x_prev, y_t), then position from today's forecast.
    double step(const RbfNetwork& net, const Eigen::VectorXd& u, double y_t);

    json snapshot() const;
    static MomentumAgent restore(const json& j);

    EwrlsState ewrls;
    Eigen::VectorXd x_prev;
    bool has_prev = false;
};

}  // namespace driftfx
