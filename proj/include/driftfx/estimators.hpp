#pragma once

#include <Eigen/Dense>
#include <optional>

#include "driftfx/serialize.hpp"

namespace driftfx {

// --- extended Kalman filter weight trainer -------------------------------------
//
// Ascent step on a scalar objective with gradient g:
//   z = 1 + gᵀPg/τ ;  k = Pg/(zτ) ;  θ ← θ + k ;  P ← P/τ − kkᵀz
// P is the weight-uncertainty (inverse-precision) matrix, re-symmetrized each
// step to keep it numerically SPD. Non-finite gradients are rejected: the
// step returns false and leaves the state untouched.
struct EkfState {
    Eigen::VectorXd weights;
    Eigen::MatrixXd cov;  // P
    double ridge = 1.0;   // α: initial P = I/α
    double decay = 0.99;  // τ ∈ (0, 1]

    static EkfState init(Eigen::Index dim, double ridge, double decay);

    bool step(const Eigen::VectorXd& gradient);

    json snapshot() const;
    static EkfState restore(const json& j);
};

// --- exponentially weighted recursive least squares ----------------------------
//
// Ridge-seeded RLS with forgetting factor τ. One update with training pair
// (x, y):
//   r = 1 + xᵀPx/τ ;  k = Px/(rτ) ;  w ← w + k(y − wᵀx) ;  P ← P/τ − kkᵀr
// After n updates the weights equal the exponentially weighted batch ridge
// solution (Σ τ^{n−i} x_i x_iᵀ + τⁿ α I)⁻¹ Σ τ^{n−i} x_i y_i, so τ = 1
// reproduces ordinary ridge regression on the seen prefix.
struct EwrlsState {
    Eigen::VectorXd weights;
    Eigen::MatrixXd cov;  // P
    double ridge = 1.0;
    double decay = 0.99;

    static EwrlsState init(Eigen::Index dim, double ridge, double decay);

    bool step(const Eigen::VectorXd& x, double y);
    double predict(const Eigen::VectorXd& x) const;  // wᵀx

    json snapshot() const;
    static EwrlsState restore(const json& j);
};

// --- moving moments -------------------------------------------------------------
//
// μ ← τμ + (1−τ)r, then σ² ← τσ² + (1−τ)(r − μ)² with the freshly updated μ.
struct MovingMoments {
    double mean = 0.0;
    double variance = 0.0;
    double decay = 0.99;

    void update(double r);
};

// --- Adam ascent (ablation alternative to the EKF trainer) ----------------------
//
// Bias correction uses the constant factors 1−β₁ and 1−β₂ (not powers of the
// step count), so the first step has an effective rate of exactly η.
struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eta = 0.001;
    double epsilon = 1e-8;

    static AdamState init(Eigen::Index dim);

    // θ ← θ + η · m̂ / (√v̂ + ε); returns false (no-op) on non-finite gradient.
    bool step(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient);
};

// --- differential Sharpe ratio ---------------------------------------------------
//
// First/second moment trackers a, b with innovation scaled by τ:
//   Δa = r − a ; Δb = r² − b ; dsr = (bΔa − ½aΔb)/(b − a²)^{3/2}
//   a ← a + τΔa ; b ← b + τΔb
// Returns 0 and marks `undefined` while the variance proxy b − a² is not
// positive (e.g. on the first observations).
struct DiffSharpeState {
    double a = 0.0;
    double b = 0.0;
    double decay = 0.99;
    bool undefined = true;

    double update(double r);
};

// --- ratios ----------------------------------------------------------------------

// Annualized information ratio √252 · (μ − b)/σ. Throws NumericError if σ ≤ 0.
double information_ratio(double mean, double benchmark, double stddev);

// Risk-appetite map λ = ir/σ with ir the NON-annualized ratio μ/σ, floored at
// lambda_min.
double risk_appetite(double mean, double stddev, double lambda_min);

}  // namespace driftfx
