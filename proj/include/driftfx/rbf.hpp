#pragma once

#include <Eigen/Dense>
#include <vector>

#include "driftfx/mixture.hpp"

namespace driftfx {

// Radial basis feature map distilled from a fitted mixture: unit j keeps
// component j's center and precision (inverse covariance); mixture weights
// are discarded. Activations are unnormalized Gaussian bumps in (0, 1].
struct RbfNetwork {
    Eigen::MatrixXd centers;                  // m x d
    std::vector<Eigen::MatrixXd> precisions;  // m matrices, d x d

    Eigen::Index size() const { return centers.rows(); }
    Eigen::Index dim() const { return centers.cols(); }

    static RbfNetwork from_mixture(const MixtureModel& model);

    // φ_j(u) = exp(-½ (u-μ_j)ᵀ Λ_j (u-μ_j)), for each unit j.
    Eigen::VectorXd activations(const Eigen::VectorXd& u) const;

    // Recurrent feature vector [1, φ_1(u), ..., φ_m(u), f_prev]; length m+2.
    Eigen::VectorXd features(const Eigen::VectorXd& u, double f_prev) const;

    json to_json() const;
    static RbfNetwork from_json(const json& j);
};

}  // namespace driftfx
