#include "driftfx/rbf.hpp"

#include <cmath>

#include "driftfx/errors.hpp"

namespace driftfx {

RbfNetwork RbfNetwork::from_mixture(const MixtureModel& model) {
    model.validate();
    RbfNetwork net;
    net.centers.resize(model.size(), model.dim);
    net.precisions.reserve(static_cast<std::size_t>(model.size()));
    for (Eigen::Index c = 0; c < model.size(); ++c) {
        const auto& comp = model.components[static_cast<std::size_t>(c)];
        net.centers.row(c) = comp.mean.transpose();
        Eigen::LLT<Eigen::MatrixXd> llt(comp.covariance);
        if (llt.info() != Eigen::Success)
            throw NumericError("component covariance is not invertible");
        net.precisions.push_back(
            llt.solve(Eigen::MatrixXd::Identity(model.dim, model.dim)));
    }
    return net;
}

Eigen::VectorXd RbfNetwork::activations(const Eigen::VectorXd& u) const {
    if (u.size() != dim()) throw ConfigError("activation input dimension mismatch");
    Eigen::VectorXd phi(size());
    for (Eigen::Index j = 0; j < size(); ++j) {
        const Eigen::VectorXd diff = u - centers.row(j).transpose();
        const double maha = diff.dot(precisions[static_cast<std::size_t>(j)] * diff);
        phi(j) = std::exp(-0.5 * maha);
    }
    return phi;
}

Eigen::VectorXd RbfNetwork::features(const Eigen::VectorXd& u, double f_prev) const {
    if (!(f_prev >= -1.0 && f_prev <= 1.0))
        throw ConfigError("recurrent slot must lie in [-1, 1]");
    const Eigen::VectorXd phi = activations(u);
    Eigen::VectorXd x(size() + 2);
    x(0) = 1.0;
    x.segment(1, size()) = phi;
    x(size() + 1) = f_prev;
    return x;
}

json RbfNetwork::to_json() const {
    json units = json::array();
    for (Eigen::Index j = 0; j < size(); ++j)
        units.push_back(json{{"center", vec_to_json(centers.row(j).transpose())},
                             {"precision", mat_to_json(precisions[static_cast<std::size_t>(j)])}});
    return json{{"dim", dim()}, {"units", units}};
}

RbfNetwork RbfNetwork::from_json(const json& j) {
    RbfNetwork net;
    const auto d = j.at("dim").get<Eigen::Index>();
    const auto& units = j.at("units");
    net.centers.resize(static_cast<Eigen::Index>(units.size()), d);
    for (Eigen::Index r = 0; r < net.centers.rows(); ++r) {
        const auto& unit = units[static_cast<std::size_t>(r)];
        net.centers.row(r) = vec_from_json(unit.at("center")).transpose();
        net.precisions.push_back(mat_from_json(unit.at("precision")));
        if (net.precisions.back().rows() != d || net.precisions.back().cols() != d)
            throw DataError("precision matrix dimension mismatch");
    }
    if (net.size() == 0) throw DataError("feature map needs at least one unit");
    return net;
}

}  // namespace driftfx
