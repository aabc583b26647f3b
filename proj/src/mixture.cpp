#include "driftfx/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "driftfx/errors.hpp"
#include "driftfx/log.hpp"
#include "driftfx/rng.hpp"

namespace driftfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cholesky cache for repeated density evaluation against one component.
struct ComponentCache {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_norm = 0.0;  // -0.5 (d ln 2π + ln|Σ|)

    explicit ComponentCache(const GaussianComponent& c) {
        llt.compute(c.covariance);
        if (llt.info() != Eigen::Success)
            throw NumericError("covariance is not positive definite");
        double log_det = 0.0;
        const auto& l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
        log_norm = -0.5 * (static_cast<double>(c.covariance.rows()) *
                               std::log(2.0 * std::numbers::pi) +
                           log_det);
    }

    double log_pdf(const Eigen::VectorXd& u, const Eigen::VectorXd& mean) const {
        const Eigen::VectorXd diff = u - mean;
        const Eigen::VectorXd solved = llt.solve(diff);
        return log_norm - 0.5 * diff.dot(solved);
    }
};

void clamp_eigenvalues(Eigen::MatrixXd& cov, double floor) {
    cov = 0.5 * (cov + cov.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericError("covariance eigendecomposition failed");
    Eigen::VectorXd evals = es.eigenvalues();
    bool touched = false;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        if (evals(i) < floor) {
            evals(i) = floor;
            touched = true;
        }
    }
    if (touched)
        cov = es.eigenvectors() * evals.asDiagonal() * es.eigenvectors().transpose();
}

// Population covariance of the rows of `data`.
Eigen::MatrixXd data_covariance(const Eigen::MatrixXd& data) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    return centered.transpose() * centered / static_cast<double>(data.rows());
}

// Per-datum log component terms: out(i, c) = ln π_c + ln N(u_i | θ_c).
Eigen::MatrixXd log_terms(const MixtureModel& model, const Eigen::MatrixXd& data) {
    const auto n = data.rows();
    const auto k = model.size();
    Eigen::MatrixXd out(n, k);
    std::vector<ComponentCache> caches;
    caches.reserve(static_cast<std::size_t>(k));
    for (const auto& c : model.components) caches.emplace_back(c);
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto& comp = model.components[static_cast<std::size_t>(c)];
        const double log_w = comp.weight > 0.0 ? std::log(comp.weight) : -kInf;
        for (Eigen::Index i = 0; i < n; ++i)
            out(i, c) = log_w + caches[static_cast<std::size_t>(c)].log_pdf(
                                    data.row(i).transpose(), comp.mean);
    }
    return out;
}

double logsumexp_row(const Eigen::MatrixXd& terms, Eigen::Index i) {
    const double peak = terms.row(i).maxCoeff();
    if (!std::isfinite(peak)) return -kInf;
    double acc = 0.0;
    for (Eigen::Index c = 0; c < terms.cols(); ++c) acc += std::exp(terms(i, c) - peak);
    return peak + std::log(acc);
}

// Seeded k-means-style initialization: distinct data rows start a short Lloyd
// pass, so initial centers are local mass centroids rather than raw data
// points. Centering on centroids keeps stray tail points from seeding tiny
// components that later entrench as spurious structure.
MixtureModel init_model(const Eigen::MatrixXd& data, int k, std::uint64_t seed,
                        double floor_abs) {
    const auto n = data.rows();
    const auto d = data.cols();
    Eigen::MatrixXd global = data_covariance(data);
    clamp_eigenvalues(global, floor_abs);
    const double scale =
        std::pow(static_cast<double>(k), -2.0 / static_cast<double>(d));
    Eigen::MatrixXd init_cov = global * scale;
    clamp_eigenvalues(init_cov, floor_abs);

    Rng rng(seed);
    const auto picks =
        rng.sample_without_replacement(static_cast<std::size_t>(n), static_cast<std::size_t>(k));

    Eigen::MatrixXd centers(k, d);
    for (int c = 0; c < k; ++c)
        centers.row(c) = data.row(static_cast<Eigen::Index>(picks[static_cast<std::size_t>(c)]));

    std::vector<Eigen::Index> owner(static_cast<std::size_t>(n), 0);
    for (int iter = 0; iter < 10; ++iter) {
        bool moved = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            double best_d2 = (data.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < k; ++c) {
                const double d2 = (data.row(i) - centers.row(c)).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            if (owner[static_cast<std::size_t>(i)] != best) moved = true;
            owner[static_cast<std::size_t>(i)] = best;
        }
        if (!moved && iter > 0) break;
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, d);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(owner[static_cast<std::size_t>(i)]) += data.row(i);
            counts(owner[static_cast<std::size_t>(i)]) += 1.0;
        }
        for (int c = 0; c < k; ++c)  // empty cells keep their previous center
            if (counts(c) > 0.0) centers.row(c) = sums.row(c) / counts(c);
    }

    MixtureModel model;
    model.dim = d;
    model.components.resize(static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < model.components.size(); ++c) {
        model.components[c].weight = 1.0 / static_cast<double>(k);
        model.components[c].mean = centers.row(static_cast<Eigen::Index>(c)).transpose();
        model.components[c].covariance = init_cov;
    }
    return model;
}

// Responsibility-weighted mean/covariance refresh for components with
// meaningful mass; others keep their parameters.
void refresh_parameters(MixtureModel& model, const Eigen::MatrixXd& data,
                        const Eigen::MatrixXd& resp, double floor_abs) {
    for (Eigen::Index c = 0; c < model.size(); ++c) {
        const double mass = resp.col(c).sum();
        if (!(mass > 1e-12)) continue;  // starving component keeps its parameters
        auto& comp = model.components[static_cast<std::size_t>(c)];
        comp.mean = (resp.col(c).transpose() * data).transpose() / mass;
        const Eigen::MatrixXd centered = data.rowwise() - comp.mean.transpose();
        comp.covariance =
            centered.transpose() * resp.col(c).asDiagonal() * centered / mass;
        clamp_eigenvalues(comp.covariance, floor_abs);
    }
}

}  // namespace

// --- model type ----------------------------------------------------------------

void MixtureModel::validate() const {
    if (components.empty()) throw ConfigError("mixture needs at least one component");
    double sum = 0.0;
    for (const auto& c : components) {
        if (c.mean.size() != dim || c.covariance.rows() != dim || c.covariance.cols() != dim)
            throw ConfigError("mixture component dimensions inconsistent");
        if (c.weight < 0.0) throw ConfigError("negative mixture weight");
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("mixture weights must sum to 1");
}

double MixtureModel::log_density(const Eigen::VectorXd& u) const {
    Eigen::MatrixXd data(1, dim);
    data.row(0) = u.transpose();
    const Eigen::MatrixXd terms = log_terms(*this, data);
    return logsumexp_row(terms, 0);
}

json MixtureModel::to_json() const {
    json comps = json::array();
    for (const auto& c : components)
        comps.push_back(json{{"weight", c.weight},
                             {"mean", vec_to_json(c.mean)},
                             {"covariance", mat_to_json(c.covariance)}});
    return json{{"dim", dim}, {"components", comps}};
}

MixtureModel MixtureModel::from_json(const json& j) {
    MixtureModel model;
    model.dim = j.at("dim").get<Eigen::Index>();
    for (const auto& c : j.at("components")) {
        GaussianComponent comp;
        comp.weight = c.at("weight").get<double>();
        comp.mean = vec_from_json(c.at("mean"));
        comp.covariance = mat_from_json(c.at("covariance"));
        model.components.push_back(std::move(comp));
    }
    model.validate();
    return model;
}

void MixtureFitConfig::validate() const {
    if (k_min < 1) throw ConfigError("k_min must be at least 1");
    if (k_max < k_min) throw ConfigError("k_max must be >= k_min");
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");
    if (max_iter < 1) throw ConfigError("max_iter must be positive");
    if (!(cov_floor > 0.0)) throw ConfigError("cov_floor must be positive");
}

// --- densities -------------------------------------------------------------------

double log_gaussian_pdf(const Eigen::VectorXd& u, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov) {
    if (u.size() != mean.size() || cov.rows() != u.size() || cov.cols() != u.size())
        throw ConfigError("gaussian_pdf dimension mismatch");
    GaussianComponent tmp{1.0, mean, cov};
    return ComponentCache(tmp).log_pdf(u, mean);
}

double gaussian_pdf(const Eigen::VectorXd& u, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov) {
    return std::exp(log_gaussian_pdf(u, mean, cov));
}

// --- EM steps ---------------------------------------------------------------------

Responsibilities e_step(const MixtureModel& model, const Eigen::MatrixXd& data) {
    model.validate();
    if (data.cols() != model.dim) throw ConfigError("e_step dimension mismatch");
    const auto n = data.rows();
    const auto k = model.size();
    const Eigen::MatrixXd terms = log_terms(model, data);

    Responsibilities resp;
    resp.r.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double denom = logsumexp_row(terms, i);
        if (!std::isfinite(denom)) {
            // Every component underflowed for this datum: spread it uniformly
            // over live components so the sweep stays well-defined.
            int live = 0;
            for (Eigen::Index c = 0; c < k; ++c)
                if (model.components[static_cast<std::size_t>(c)].weight > 0.0) ++live;
            for (Eigen::Index c = 0; c < k; ++c)
                resp.r(i, c) =
                    model.components[static_cast<std::size_t>(c)].weight > 0.0 && live > 0
                        ? 1.0 / live
                        : 0.0;
            ++resp.underflow_rows;
            continue;
        }
        for (Eigen::Index c = 0; c < k; ++c) resp.r(i, c) = std::exp(terms(i, c) - denom);
    }
    if (resp.underflow_rows > 0)
        log_debug("e_step: " + std::to_string(resp.underflow_rows) + " underflow rows");
    return resp;
}

MixtureModel m_step(const Eigen::MatrixXd& data, const Responsibilities& resp,
                    double cov_floor_abs) {
    const auto n = data.rows();
    if (resp.r.rows() != n) throw ConfigError("m_step responsibilities misaligned with data");
    MixtureModel model;
    model.dim = data.cols();
    for (Eigen::Index c = 0; c < resp.r.cols(); ++c) {
        const double mass = resp.r.col(c).sum();
        if (!(mass > 0.0)) continue;  // dropped; caller decides what that means
        GaussianComponent comp;
        comp.weight = mass / static_cast<double>(n);
        comp.mean = (resp.r.col(c).transpose() * data).transpose() / mass;
        const Eigen::MatrixXd centered = data.rowwise() - comp.mean.transpose();
        comp.covariance = centered.transpose() * resp.r.col(c).asDiagonal() * centered / mass;
        clamp_eigenvalues(comp.covariance, cov_floor_abs);
        model.components.push_back(std::move(comp));
    }
    if (model.components.empty()) throw NumericError("m_step: all components lost their mass");
    return model;
}

double resolve_cov_floor(const Eigen::MatrixXd& data, double cov_floor_rel) {
    if (!(cov_floor_rel > 0.0)) throw ConfigError("cov_floor must be positive");
    const double scale = data_covariance(data).trace() / static_cast<double>(data.cols());
    const double floor = cov_floor_rel * scale;
    return floor > 0.0 ? floor : 1e-300;  // degenerate data: keep factorizable
}

EmResult em_fit(const Eigen::MatrixXd& data, int k, const MixtureFitConfig& config) {
    config.validate();
    if (k < 1) throw ConfigError("em_fit needs k >= 1");
    if (data.rows() <= k) throw ConfigError("em_fit needs more data rows than components");
    const double floor_abs = resolve_cov_floor(data, config.cov_floor);

    EmResult result;
    result.model = init_model(data, k, config.seed, floor_abs);
    double prev_ll = -kInf;
    for (int iter = 0; iter < config.max_iter; ++iter) {
        const Responsibilities resp = e_step(result.model, data);
        result.model = m_step(data, resp, floor_abs);
        double ll = 0.0;
        const Eigen::MatrixXd terms = log_terms(result.model, data);
        for (Eigen::Index i = 0; i < data.rows(); ++i) ll += logsumexp_row(terms, i);
        result.ll_trace.push_back(ll);
        result.log_likelihood = ll;
        if (std::isfinite(prev_ll) &&
            std::abs(ll - prev_ll) / std::max(std::abs(ll), 1.0) < config.tol) {
            result.converged = true;
            break;
        }
        prev_ll = ll;
    }
    return result;
}

// --- parsimony criterion --------------------------------------------------------------

double param_count_per_component(Eigen::Index d) {
    return static_cast<double>(d) +
           static_cast<double>(d) * (static_cast<double>(d) + 1.0) / 2.0;
}

double message_length(const MixtureModel& model, const Eigen::MatrixXd& data) {
    model.validate();
    const double n = static_cast<double>(data.rows());
    const double big_n = param_count_per_component(model.dim);

    double weight_term = 0.0;
    int live = 0;
    for (const auto& c : model.components) {
        if (c.weight <= 0.0) continue;
        ++live;
        weight_term += std::log(n * c.weight / 12.0);
    }
    if (live == 0) throw NumericError("message_length: no live components");

    double ll = 0.0;
    const Eigen::MatrixXd terms = log_terms(model, data);
    for (Eigen::Index i = 0; i < data.rows(); ++i) ll += logsumexp_row(terms, i);

    const double k = static_cast<double>(live);
    return 0.5 * big_n * weight_term + 0.5 * k * std::log(n / 12.0) +
           k * (big_n + 1.0) / 2.0 - ll;
}

Eigen::VectorXd modified_weights(const Eigen::VectorXd& masses, double param_count) {
    Eigen::VectorXd clipped =
        (masses.array() - param_count / 2.0).max(0.0).matrix();
    const double total = clipped.sum();
    if (total > 0.0) clipped /= total;
    return clipped;
}

// --- annealed fit ----------------------------------------------------------------------

FjResult fj_fit(const Eigen::MatrixXd& data, const MixtureFitConfig& config) {
    config.validate();
    const auto n = data.rows();
    if (n <= config.k_max)
        throw ConfigError("fj_fit needs more data rows than k_max components");
    const double floor_abs = resolve_cov_floor(data, config.cov_floor);
    const double big_n = param_count_per_component(data.cols());

    MixtureModel model = init_model(data, config.k_max, config.seed, floor_abs);

    struct Candidate {
        MixtureModel model;
        double ml;
        bool converged;
    };
    std::vector<Candidate> recorded;
    FjResult result;

    auto remove_component = [&](std::size_t idx) {
        model.components.erase(model.components.begin() + static_cast<std::ptrdiff_t>(idx));
    };

    double prev_ml = kInf;
    int level_sweeps = 0;
    const int max_total =
        (config.k_max - config.k_min + 1) * config.max_iter + config.k_max + 1;

    while (result.sweeps < max_total) {
        ++result.sweeps;
        ++level_sweeps;

        Responsibilities resp = e_step(model, data);
        Eigen::VectorXd masses = resp.r.colwise().sum().transpose();

        // At most one annihilation per sweep: the weakest component whose
        // thresholded weight hits zero is removed, then responsibilities are
        // refreshed so its mass redistributes before anything else happens.
        bool removed = false;
        if (model.size() > config.k_min) {
            const Eigen::VectorXd trial = modified_weights(masses, big_n);
            Eigen::Index weakest = -1;
            double weakest_mass = kInf;
            for (Eigen::Index c = 0; c < trial.size(); ++c) {
                if (trial(c) == 0.0 && masses(c) < weakest_mass) {
                    weakest_mass = masses(c);
                    weakest = c;
                }
            }
            if (weakest >= 0) {
                remove_component(static_cast<std::size_t>(weakest));
                removed = true;
                double total = 0.0;
                for (const auto& c : model.components) total += c.weight;
                if (total > 0.0)
                    for (auto& c : model.components) c.weight /= total;
                else
                    for (auto& c : model.components)
                        c.weight = 1.0 / static_cast<double>(model.size());
                resp = e_step(model, data);
                masses = resp.r.colwise().sum().transpose();
            }
        }

        // Weight refresh: always the thresholded update. A survivor whose
        // thresholded weight lands at zero keeps a seat this sweep and is
        // reaped on a later one (removals stay one per sweep). Only at the
        // k_min floor — or when thresholding would zero every component —
        // does the plain mass update keep the model usable.
        Eigen::VectorXd weights = modified_weights(masses, big_n);
        if ((weights.array() <= 0.0).any()) {
            const bool at_floor = model.size() == config.k_min;
            if (at_floor || (weights.array() <= 0.0).all()) {
                weights = masses / masses.sum();
                if (at_floor && !removed) result.kmin_suppressed = true;
            }
        }
        for (Eigen::Index c = 0; c < model.size(); ++c)
            model.components[static_cast<std::size_t>(c)].weight = weights(c);
        result.max_weight_sum_dev =
            std::max(result.max_weight_sum_dev, std::abs(weights.sum() - 1.0));

        refresh_parameters(model, data, resp.r, floor_abs);
        const double ml = message_length(model, data);

        if (removed) {  // component count changed: restart the level tracker
            level_sweeps = 0;
            prev_ml = ml;
            continue;
        }

        const bool level_converged =
            std::abs(ml - prev_ml) / std::max(std::abs(ml), 1.0) < config.tol;
        if (level_converged || level_sweeps >= config.max_iter) {
            if (std::isfinite(ml)) {
                MixtureModel snap = model;  // drop any zero-weight seat still
                std::erase_if(snap.components,  // awaiting its reap sweep
                              [](const GaussianComponent& c) { return c.weight <= 0.0; });
                recorded.push_back({snap, ml, level_converged});
                result.k_path.push_back(static_cast<int>(snap.size()));
                result.ml_path.push_back(ml);
                if (!level_converged) result.converged = false;
            }
            if (model.size() <= config.k_min) break;
            // Force the weakest component out and keep descending the k-path.
            Eigen::Index weakest = 0;
            for (Eigen::Index c = 1; c < model.size(); ++c)
                if (model.components[static_cast<std::size_t>(c)].weight <
                    model.components[static_cast<std::size_t>(weakest)].weight)
                    weakest = c;
            remove_component(static_cast<std::size_t>(weakest));
            // Renormalize survivors so the next sweep starts from a valid model.
            double total = 0.0;
            for (const auto& c : model.components) total += c.weight;
            for (auto& c : model.components) c.weight /= total;
            level_sweeps = 0;
            prev_ml = kInf;
            continue;
        }
        prev_ml = ml;
    }

    if (recorded.empty())
        throw NumericError("fj_fit: no valid model survived the annihilation path");
    // Recorded lengths carry the per-level stopping slack and the criterion
    // itself holds only up to additive constants, so the argmin is resolved
    // with a parsimony band: fewest components within half a log of the sharp
    // minimum, ties to the shorter code.
    double ml_min = kInf;
    for (const auto& c : recorded) ml_min = std::min(ml_min, c.ml);
    const double band = 0.5 * std::log(static_cast<double>(n));
    const Candidate* best = nullptr;
    for (const auto& c : recorded) {
        if (c.ml > ml_min + band) continue;
        if (!best || c.model.size() < best->model.size() ||
            (c.model.size() == best->model.size() && c.ml < best->ml))
            best = &c;
    }
    result.model = best->model;
    result.message_length = best->ml;
    result.model.validate();
    log_info("fj_fit: selected k=" + std::to_string(result.model.size()) +
             " with criterion " + std::to_string(result.message_length));
    return result;
}

}  // namespace driftfx
