#include "driftfx/estimators.hpp"

#include <cmath>

#include "driftfx/errors.hpp"

namespace driftfx {

namespace {

void check_dim_positive(Eigen::Index dim) {
    if (dim <= 0) throw ConfigError("estimator dimension must be positive");
}

void check_hyper(double ridge, double decay) {
    if (!(ridge > 0.0)) throw ConfigError("ridge must be positive");
    if (!(decay > 0.0) || decay > 1.0) throw ConfigError("decay must be in (0, 1]");
}

void resymmetrize(Eigen::MatrixXd& p) { p = 0.5 * (p + p.transpose()).eval(); }

}  // namespace

// --- EKF -----------------------------------------------------------------------

EkfState EkfState::init(Eigen::Index dim, double ridge, double decay) {
    check_dim_positive(dim);
    check_hyper(ridge, decay);
    EkfState s;
    s.weights = Eigen::VectorXd::Zero(dim);
    s.cov = Eigen::MatrixXd::Identity(dim, dim) / ridge;
    s.ridge = ridge;
    s.decay = decay;
    return s;
}

bool EkfState::step(const Eigen::VectorXd& gradient) {
    if (gradient.size() != weights.size())
        throw ConfigError("gradient dimension mismatch in EKF step");
    if (!gradient.allFinite()) return false;

    const double tau = decay;
    const Eigen::VectorXd pg = cov * gradient;
    const double z = 1.0 + gradient.dot(pg) / tau;
    const Eigen::VectorXd k = pg / (z * tau);
    weights += k;
    cov = cov / tau - (k * k.transpose()) * z;
    resymmetrize(cov);
    return true;
}

json EkfState::snapshot() const {
    return json{{"weights", vec_to_json(weights)},
                {"cov", mat_to_json(cov)},
                {"ridge", ridge},
                {"decay", decay}};
}

EkfState EkfState::restore(const json& j) {
    EkfState s;
    s.weights = vec_from_json(j.at("weights"));
    s.cov = mat_from_json(j.at("cov"));
    s.ridge = j.at("ridge").get<double>();
    s.decay = j.at("decay").get<double>();
    check_hyper(s.ridge, s.decay);
    if (s.cov.rows() != s.weights.size() || s.cov.cols() != s.weights.size())
        throw DataError("EKF snapshot dimensions inconsistent");
    return s;
}

// --- EWRLS -----------------------------------------------------------------------

EwrlsState EwrlsState::init(Eigen::Index dim, double ridge, double decay) {
    check_dim_positive(dim);
    check_hyper(ridge, decay);
    EwrlsState s;
    s.weights = Eigen::VectorXd::Zero(dim);
    s.cov = Eigen::MatrixXd::Identity(dim, dim) / ridge;
    s.ridge = ridge;
    s.decay = decay;
    return s;
}

bool EwrlsState::step(const Eigen::VectorXd& x, double y) {
    if (x.size() != weights.size()) throw ConfigError("regressor dimension mismatch in RLS step");
    if (!x.allFinite() || !std::isfinite(y)) return false;

    const double tau = decay;
    const Eigen::VectorXd px = cov * x;
    const double r = 1.0 + x.dot(px) / tau;
    const Eigen::VectorXd k = px / (r * tau);
    weights += k * (y - weights.dot(x));
    cov = cov / tau - (k * k.transpose()) * r;
    resymmetrize(cov);
    return true;
}

double EwrlsState::predict(const Eigen::VectorXd& x) const {
    if (x.size() != weights.size()) throw ConfigError("regressor dimension mismatch in predict");
    return weights.dot(x);
}

json EwrlsState::snapshot() const {
    return json{{"weights", vec_to_json(weights)},
                {"cov", mat_to_json(cov)},
                {"ridge", ridge},
                {"decay", decay}};
}

EwrlsState EwrlsState::restore(const json& j) {
    EwrlsState s;
    s.weights = vec_from_json(j.at("weights"));
    s.cov = mat_from_json(j.at("cov"));
    s.ridge = j.at("ridge").get<double>();
    s.decay = j.at("decay").get<double>();
    check_hyper(s.ridge, s.decay);
    if (s.cov.rows() != s.weights.size() || s.cov.cols() != s.weights.size())
        throw DataError("RLS snapshot dimensions inconsistent");
    return s;
}

// --- moving moments ---------------------------------------------------------------

void MovingMoments::update(double r) {
    const double tau = decay;
    mean = tau * mean + (1.0 - tau) * r;
    const double dev = r - mean;  // deviation from the updated mean
    variance = tau * variance + (1.0 - tau) * dev * dev;
}

// --- Adam -------------------------------------------------------------------------

AdamState AdamState::init(Eigen::Index dim) {
    check_dim_positive(dim);
    AdamState s;
    s.m = Eigen::VectorXd::Zero(dim);
    s.v = Eigen::VectorXd::Zero(dim);
    return s;
}

bool AdamState::step(Eigen::VectorXd& theta, const Eigen::VectorXd& gradient) {
    if (gradient.size() != m.size() || theta.size() != m.size())
        throw ConfigError("gradient dimension mismatch in Adam step");
    if (!gradient.allFinite()) return false;

    m = beta1 * m + (1.0 - beta1) * gradient;
    v = beta2 * v + (1.0 - beta2) * gradient.cwiseProduct(gradient);
    const Eigen::VectorXd m_hat = m / (1.0 - beta1);
    const Eigen::VectorXd v_hat = v / (1.0 - beta2);
    theta += eta * (m_hat.array() / (v_hat.array().sqrt() + epsilon)).matrix();
    return true;
}

// --- differential Sharpe ratio ------------------------------------------------------

double DiffSharpeState::update(double r) {
    const double delta_a = r - a;
    const double delta_b = r * r - b;
    const double spread = b - a * a;
    double dsr = 0.0;
    if (spread > 0.0) {
        undefined = false;
        dsr = (b * delta_a - 0.5 * a * delta_b) / std::pow(spread, 1.5);
    } else {
        undefined = true;
    }
    a += decay * delta_a;
    b += decay * delta_b;
    return dsr;
}

// --- ratios ---------------------------------------------------------------------------

double information_ratio(double mean, double benchmark, double stddev) {
    if (!(stddev > 0.0)) throw NumericError("information_ratio requires positive dispersion");
    return std::sqrt(252.0) * (mean - benchmark) / stddev;
}

double risk_appetite(double mean, double stddev, double lambda_min) {
    if (!(stddev > 0.0)) throw NumericError("risk_appetite requires positive dispersion");
    const double ir = mean / stddev;  // non-annualized
    return std::max(ir / stddev, lambda_min);
}

}  // namespace driftfx
