#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "driftfx/serialize.hpp"

namespace driftfx {

// --- model types ---------------------------------------------------------------

struct GaussianComponent {
    double weight = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // symmetric, eigenvalues kept above the fit floor
};

struct MixtureModel {
    Eigen::Index dim = 0;
    std::vector<GaussianComponent> components;

    Eigen::Index size() const { return static_cast<Eigen::Index>(components.size()); }
    void validate() const;  // throws ConfigError/NumericError on broken invariants

    // log Σ_c π_c N(u | μ_c, Σ_c), computed in log space.
    double log_density(const Eigen::VectorXd& u) const;

    json to_json() const;
    static MixtureModel from_json(const json& j);
};

struct MixtureFitConfig {
    int k_min = 1;
    int k_max = 25;
    double tol = 1e-6;       // relative change of the fit criterion
    int max_iter = 500;      // sweep cap per component count
    double cov_floor = 1e-9; // RELATIVE eigenvalue floor, scaled by tr(cov(data))/d
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-datum component responsibilities (rows sum to 1).
struct Responsibilities {
    Eigen::MatrixXd r;        // n x k
    int underflow_rows = 0;   // rows that fell back to uniform assignment
};

// --- densities and EM steps ------------------------------------------------------

// N(u | mean, cov); throws NumericError when cov has no Cholesky factor.
double gaussian_pdf(const Eigen::VectorXd& u, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov);
double log_gaussian_pdf(const Eigen::VectorXd& u, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov);

// r_ic = π_c N(u_i|θ_c) / Σ_j π_j N(u_i|θ_j), in log space; a datum whose
// every component term underflows gets a uniform row and is counted.
Responsibilities e_step(const MixtureModel& model, const Eigen::MatrixXd& data);

// Weighted re-estimation: π_c = mass_c/n, mean/cov responsibility-weighted,
// covariance eigenvalues clamped at cov_floor_abs. Components with zero mass
// are dropped.
MixtureModel m_step(const Eigen::MatrixXd& data, const Responsibilities& resp,
                    double cov_floor_abs);

struct EmResult {
    MixtureModel model;
    double log_likelihood = 0.0;
    std::vector<double> ll_trace;  // one entry per iteration
    bool converged = false;
};

// Classic EM at fixed component count (seeded data-point initialization).
EmResult em_fit(const Eigen::MatrixXd& data, int k, const MixtureFitConfig& config);

// --- parsimony-driven fit ---------------------------------------------------------

// Parameters per component for a full-covariance Gaussian in d dimensions.
double param_count_per_component(Eigen::Index d);

// Two-part code length of (model, data): with N = d + d(d+1)/2 and k live
// components,
//   (N/2) Σ_c ln(n π_c / 12) + (k/2) ln(n/12) + k(N+1)/2 − log-likelihood.
double message_length(const MixtureModel& model, const Eigen::MatrixXd& data);

// Mass-thresholded weight update: max{0, mass_c − N/2} renormalized; returns
// all zeros when every component is below threshold.
Eigen::VectorXd modified_weights(const Eigen::VectorXd& masses, double param_count);

struct FjResult {
    MixtureModel model;
    double message_length = 0.0;
    std::vector<int> k_path;        // component count at each recorded convergence
    std::vector<double> ml_path;    // message length recorded alongside k_path
    int sweeps = 0;                 // total EM sweeps across the whole path
    double max_weight_sum_dev = 0;  // worst |Σπ − 1| seen after any sweep
    bool kmin_suppressed = false;   // annihilation blocked at k_min
    bool converged = true;          // every recorded level converged within max_iter
};

// Starts at k_max components (seeded distinct data rows as centers, global
// covariance scaled by k_max^{-2/d}), anneals component count downward by
// annihilating unsupported components (at most one per sweep, weakest first),
// records each converged model, and returns the one with minimum message
// length. Never returns fewer than k_min components.
FjResult fj_fit(const Eigen::MatrixXd& data, const MixtureFitConfig& config);

// Absolute eigenvalue floor used by the fitters: cov_floor_rel·tr(cov(data))/d,
// with a tiny positive fallback for degenerate data.
double resolve_cov_floor(const Eigen::MatrixXd& data, double cov_floor_rel);

}  // namespace driftfx
