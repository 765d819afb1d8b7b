#include "cpseq/proxy.hpp"

#include <algorithm>
#include <cmath>

namespace cpseq::proxy {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kPsdTol = 1e-9;
constexpr double kConvergenceTol = 1e-9;
constexpr int kMaxCycles = 10'000;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& M) {
    return 0.5 * (M + M.transpose());
}

bool is_symmetric(const Eigen::MatrixXd& M) {
    return (M - M.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol;
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(M));
    return solver.eigenvalues().minCoeff();
}

// Observation matrix and noise covariance restricted to the policy's
// active channels, rows in active_channels order.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> restrict_channels(const StateSpaceModel& model,
                                                              const SamplingPolicy& policy) {
    const auto k = static_cast<Eigen::Index>(policy.active_channels.size());
    Eigen::MatrixXd C_a(k, model.n());
    Eigen::MatrixXd R_a(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        C_a.row(i) = model.C.row(policy.active_channels[i]);
        for (Eigen::Index j = 0; j < k; ++j) {
            R_a(i, j) = model.R(policy.active_channels[i], policy.active_channels[j]);
        }
    }
    return {std::move(C_a), std::move(R_a)};
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& C_a,
                            const Eigen::MatrixXd& R_a) {
    const Eigen::MatrixXd S = C_a * P * C_a.transpose() + R_a;
    return S.ldlt().solve(C_a * P).transpose();
}

// Joseph-form covariance update; keeps P symmetric PSD under roundoff.
Eigen::MatrixXd joseph_update(const Eigen::MatrixXd& P, const Eigen::MatrixXd& K,
                              const Eigen::MatrixXd& C_a, const Eigen::MatrixXd& R_a) {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(P.rows(), P.cols());
    const Eigen::MatrixXd IKC = I - K * C_a;
    return symmetrized(IKC * P * IKC.transpose() + K * R_a * K.transpose());
}

// (A^p, sum_{i<p} A^i Q A^i^T): covariance propagation over p predict
// ticks collapsed into one step, built by doubling.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lifted_predict(const StateSpaceModel& model,
                                                           std::uint32_t period) {
    Eigen::MatrixXd A_acc = Eigen::MatrixXd::Identity(model.n(), model.n());
    Eigen::MatrixXd Q_acc = Eigen::MatrixXd::Zero(model.n(), model.n());
    Eigen::MatrixXd A_pow = model.A;
    Eigen::MatrixXd Q_pow = model.Q;
    std::uint32_t remaining = period;
    while (remaining != 0) {
        if (remaining & 1u) {
            Q_acc = A_pow * Q_acc * A_pow.transpose() + Q_pow;
            A_acc = A_pow * A_acc;
        }
        remaining >>= 1;
        if (remaining != 0) {
            Q_pow = A_pow * Q_pow * A_pow.transpose() + Q_pow;
            A_pow = A_pow * A_pow;
        }
    }
    return {std::move(A_acc), symmetrized(Q_acc)};
}

}  // namespace

std::optional<Eigen::Index> StateSpaceModel::state_index(std::string_view name) const {
    for (std::size_t i = 0; i < state_names.size(); ++i) {
        if (state_names[i] == name) return static_cast<Eigen::Index>(i);
    }
    return std::nullopt;
}

void validate_model(const StateSpaceModel& model) {
    const Eigen::Index n = model.A.rows();
    const Eigen::Index m = model.C.rows();
    if (n == 0) fail(Errc::configuration, "state dimension is zero");
    if (model.A.cols() != n) fail(Errc::configuration, "A is not square");
    if (model.C.cols() != n) fail(Errc::configuration, "C column count does not match state");
    if (m == 0) fail(Errc::configuration, "no observation channels");
    if (model.Q.rows() != n || model.Q.cols() != n) {
        fail(Errc::configuration, "Q dimensions do not match state");
    }
    if (model.R.rows() != m || model.R.cols() != m) {
        fail(Errc::configuration, "R dimensions do not match channels");
    }
    if (static_cast<Eigen::Index>(model.state_names.size()) != n ||
        static_cast<Eigen::Index>(model.state_units.size()) != n) {
        fail(Errc::configuration, "state labels do not match state dimension");
    }
    if (static_cast<Eigen::Index>(model.channel_names.size()) != m) {
        fail(Errc::configuration, "channel labels do not match channel count");
    }
    if (!is_symmetric(model.Q)) fail(Errc::configuration, "Q is not symmetric");
    if (!is_symmetric(model.R)) fail(Errc::configuration, "R is not symmetric");
    if (min_eigenvalue(model.Q) < -kPsdTol) {
        fail(Errc::configuration, "Q is not positive semi-definite");
    }
    if (min_eigenvalue(model.R) <= kPsdTol * model.R.norm()) {
        fail(Errc::configuration, "R is not positive definite");
    }
}

Eigen::Index observability_rank(const StateSpaceModel& model) {
    const Eigen::Index n = model.n();
    const Eigen::Index m = model.m();
    Eigen::MatrixXd obs(m * n, n);
    Eigen::MatrixXd block = model.C;
    for (Eigen::Index i = 0; i < n; ++i) {
        obs.middleRows(i * m, m) = block;
        block = block * model.A;
    }
    return Eigen::FullPivLU<Eigen::MatrixXd>(obs).rank();
}

void validate_policy(const SamplingPolicy& policy, const StateSpaceModel& model) {
    if (policy.period < 1) fail(Errc::validation, "sampling period must be >= 1");
    if (policy.active_channels.empty()) {
        fail(Errc::validation, "sampling policy needs at least one active channel");
    }
    Eigen::Index prev = -1;
    for (Eigen::Index channel : policy.active_channels) {
        if (channel < 0 || channel >= model.m()) {
            fail(Errc::validation, "active channel index out of range");
        }
        if (channel <= prev) {
            fail(Errc::validation, "active channels must be ascending and unique");
        }
        prev = channel;
    }
}

CertifyResult certify_policy(const StateSpaceModel& model, const SamplingPolicy& policy,
                             const QualityOfData& qod) {
    validate_model(model);
    validate_policy(policy, model);
    const Eigen::Index n = model.n();
    if (static_cast<Eigen::Index>(qod.max_stddev.size()) != n) {
        fail(Errc::configuration, "quality-of-data bound count does not match state dimension");
    }
    for (double bound : qod.max_stddev) {
        if (!(bound > 0.0)) fail(Errc::validation, "quality-of-data bounds must be positive");
    }

    const auto [C_a, R_a] = restrict_channels(model, policy);
    const auto [A_p, Q_p] = lifted_predict(model, policy.period);
    CertifyResult result;
    if (!A_p.allFinite() || !Q_p.allFinite()) {
        result.rejection = "diverged: covariance overflows across one sampling period";
        return result;
    }

    // Fixed point of the cycle map, anchored at the post-update covariance.
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
    bool converged = false;
    for (int cycle = 0; cycle < kMaxCycles; ++cycle) {
        const Eigen::MatrixXd P_pre = symmetrized(A_p * P * A_p.transpose() + Q_p);
        if (!P_pre.allFinite()) break;
        const Eigen::MatrixXd K = kalman_gain(P_pre, C_a, R_a);
        const Eigen::MatrixXd P_post = joseph_update(P_pre, K, C_a, R_a);
        if (!P_post.allFinite()) break;
        const double delta = (P_post - P).cwiseAbs().maxCoeff();
        P = P_post;
        if (delta < kConvergenceTol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        result.rejection =
            "diverged: no steady state under this policy (undetectable or unstable mode)";
        return result;
    }

    // Walk one steady cycle and keep the worst per-state variance seen at
    // any tick within it.
    Eigen::VectorXd worst = P.diagonal();
    Eigen::MatrixXd P_walk = P;
    for (std::uint32_t step = 0; step < policy.period; ++step) {
        P_walk = symmetrized(model.A * P_walk * model.A.transpose() + model.Q);
        worst = worst.cwiseMax(P_walk.diagonal());
    }

    result.steady_stddevs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        result.steady_stddevs[i] = std::sqrt(std::max(0.0, worst(i)));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (result.steady_stddevs[i] > qod.max_stddev[i]) {
            result.rejection = model.state_names[i];
            return result;
        }
    }
    result.certified = true;
    return result;
}

SamplingPolicy adapt_policy(const StateSpaceModel& model, SamplingPolicy policy,
                            const QualityOfData& qod) {
    constexpr std::uint32_t kMaxPeriod = 1u << 16;
    if (!certify_policy(model, policy, qod).certified) return policy;

    bool improved = true;
    while (improved) {
        improved = false;
        if (policy.period <= kMaxPeriod / 2) {
            SamplingPolicy doubled = policy;
            doubled.period *= 2;
            if (certify_policy(model, doubled, qod).certified) {
                policy = std::move(doubled);
                improved = true;
                continue;
            }
        }
        if (policy.active_channels.size() > 1) {
            for (std::size_t drop = 0; drop < policy.active_channels.size(); ++drop) {
                SamplingPolicy thinned = policy;
                thinned.active_channels.erase(thinned.active_channels.begin() +
                                              static_cast<std::ptrdiff_t>(drop));
                if (certify_policy(model, thinned, qod).certified) {
                    policy = std::move(thinned);
                    improved = true;
                    break;
                }
            }
        }
    }
    return policy;
}

std::string_view to_string(TriggerDirection direction) {
    return direction == TriggerDirection::rising ? "rising" : "falling";
}

std::optional<TriggerDirection> parse_trigger_direction(std::string_view text) {
    if (text == "rising") return TriggerDirection::rising;
    if (text == "falling") return TriggerDirection::falling;
    return std::nullopt;
}

void ModelRegistry::add(const std::string& class_label, GeneralizedModel generalized) {
    validate_model(generalized.model);
    const Eigen::Index n = generalized.model.n();
    if (observability_rank(generalized.model) != n) {
        fail(Errc::configuration,
             "generalized model for '" + class_label + "' is not fully observable");
    }
    if (generalized.prior_mean.size() != n) {
        fail(Errc::configuration, "prior mean dimension does not match state");
    }
    if (generalized.prior_covariance.rows() != n || generalized.prior_covariance.cols() != n) {
        fail(Errc::configuration, "prior covariance dimensions do not match state");
    }
    if (!is_symmetric(generalized.prior_covariance) ||
        min_eigenvalue(generalized.prior_covariance) < -kPsdTol) {
        fail(Errc::configuration, "prior covariance is not symmetric positive semi-definite");
    }
    models_[class_label] = std::move(generalized);
}

const GeneralizedModel* ModelRegistry::find(std::string_view class_label) const {
    auto it = models_.find(class_label);
    return it == models_.end() ? nullptr : &it->second;
}

ModelRegistry ModelRegistry::with_builtins() {
    GeneralizedModel key;
    key.model.A.resize(2, 2);
    key.model.A << 1.0, 0.001, 0.0, 0.99;
    key.model.C = Eigen::MatrixXd::Identity(2, 2);
    key.model.Q = Eigen::Vector2d(1e-6, 1e-4).asDiagonal();
    key.model.R = Eigen::Vector2d(2.5e-3, 1e-2).asDiagonal();
    key.model.state_names = {"wear_index", "usage_rate"};
    key.model.state_units = {"fraction", "per_tick"};
    key.model.channel_names = {"wear_index", "usage_rate"};
    key.prior_mean = Eigen::Vector2d(0.1, 0.5);
    key.prior_covariance = Eigen::MatrixXd::Identity(2, 2) * 0.1;

    ModelRegistry registry;
    registry.add("key", std::move(key));
    return registry;
}

DataProxy::DataProxy(std::string class_label, const GeneralizedModel& generalized, Tick now)
    : class_label_(std::move(class_label)), model_(generalized.model) {
    validate_model(model_);
    state_.x_hat = generalized.prior_mean;
    state_.P = generalized.prior_covariance;
    state_.last_update = now;
    policy_.period = 1;
    policy_.active_channels.resize(model_.m());
    for (Eigen::Index i = 0; i < model_.m(); ++i) policy_.active_channels[i] = i;
}

void DataProxy::set_qod(QualityOfData qod) {
    if (static_cast<Eigen::Index>(qod.max_stddev.size()) != model_.n()) {
        fail(Errc::configuration, "quality-of-data bound count does not match state dimension");
    }
    for (double bound : qod.max_stddev) {
        if (!(bound > 0.0)) fail(Errc::validation, "quality-of-data bounds must be positive");
    }
    qod_ = std::move(qod);
}

void DataProxy::add_trigger(Trigger trigger) {
    auto idx = model_.state_index(trigger.state_name);
    if (!idx) {
        fail(Errc::configuration, "trigger references unknown state '" + trigger.state_name + "'");
    }
    trigger_prev_.push_back(state_.x_hat(*idx));
    triggers_.push_back(std::move(trigger));
}

void DataProxy::step(Tick now, const std::optional<Eigen::VectorXd>& measurement) {
    state_.x_hat = model_.A * state_.x_hat;
    state_.P = symmetrized(model_.A * state_.P * model_.A.transpose() + model_.Q);
    if (measurement) {
        if (measurement->size() != static_cast<Eigen::Index>(policy_.active_channels.size())) {
            fail(Errc::validation, "measurement dimension does not match active channels");
        }
        if (!measurement->allFinite()) fail(Errc::validation, "measurement has non-finite entries");
        const auto [C_a, R_a] = restrict_channels(model_, policy_);
        const Eigen::MatrixXd K = kalman_gain(state_.P, C_a, R_a);
        state_.x_hat += K * (*measurement - C_a * state_.x_hat);
        state_.P = joseph_update(state_.P, K, C_a, R_a);
    }
    state_.last_update = now;
}

CertifyResult DataProxy::adapt() {
    if (qod_.max_stddev.empty()) {
        fail(Errc::configuration, "cannot adapt without quality-of-data bounds");
    }
    policy_ = adapt_policy(model_, policy_, qod_);
    return certify_policy(model_, policy_, qod_);
}

std::vector<TriggerFiring> DataProxy::evaluate_triggers(Tick now) {
    std::vector<TriggerFiring> firings;
    for (std::size_t i = 0; i < triggers_.size(); ++i) {
        const Trigger& trigger = triggers_[i];
        const double value = state_.x_hat(*model_.state_index(trigger.state_name));
        const std::optional<double> prev = trigger_prev_[i];
        trigger_prev_[i] = value;
        if (!prev) continue;
        const bool fired = trigger.direction == TriggerDirection::rising
                               ? (*prev <= trigger.threshold && value > trigger.threshold)
                               : (*prev >= trigger.threshold && value < trigger.threshold);
        if (fired) {
            firings.push_back({trigger.state_name, trigger.threshold, trigger.direction, value, now});
        }
    }
    return firings;
}

meta::StateSnapshot DataProxy::snapshot(Tick now) const {
    meta::StateSnapshot snap;
    snap.as_of = now;
    snap.source = meta::SnapshotSource::proxy_estimate;
    for (Eigen::Index i = 0; i < model_.n(); ++i) {
        snap.state[model_.state_names[i]] = {state_.x_hat(i), model_.state_units[i]};
    }
    return snap;
}

DataProxy instantiate_proxy(const std::string& class_label, const ModelRegistry& registry,
                            Tick now) {
    const GeneralizedModel* generalized = registry.find(class_label);
    if (generalized == nullptr) {
        fail(Errc::configuration, "no generalized model registered for class '" + class_label + "'");
    }
    return DataProxy(class_label, *generalized, now);
}

}  // namespace cpseq::proxy
