#pragma once
// Data Proxy: a discrete-time linear-Gaussian estimator that mirrors an
// asset from sparse samples. A generalized per-class model is adapted to
// the cheapest sampling policy whose steady-state error stays inside the
// caller's quality-of-data bounds.

#include "cpseq/errors.hpp"
#include "cpseq/metadata.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpseq::proxy {

struct StateSpaceModel {
    Eigen::MatrixXd A;  // n x n state transition
    Eigen::MatrixXd C;  // m x n observation
    Eigen::MatrixXd Q;  // n x n process noise covariance
    Eigen::MatrixXd R;  // m x m measurement noise covariance
    std::vector<std::string> state_names;    // n entries
    std::vector<std::string> state_units;    // n entries
    std::vector<std::string> channel_names;  // m entries

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index m() const { return C.rows(); }
    std::optional<Eigen::Index> state_index(std::string_view name) const;
};

// Dimension, symmetry, and noise-definiteness checks (Q PSD, R PD).
void validate_model(const StateSpaceModel& model);

// Rank of [C; CA; ...; CA^(n-1)].
Eigen::Index observability_rank(const StateSpaceModel& model);

struct ProxyState {
    Eigen::VectorXd x_hat;
    Eigen::MatrixXd P;
    Tick last_update = 0;
};

struct SamplingPolicy {
    std::uint32_t period = 1;                  // ticks between samples, >= 1
    std::vector<Eigen::Index> active_channels;  // ascending, non-empty

    double cost() const { return static_cast<double>(active_channels.size()) / period; }
};

void validate_policy(const SamplingPolicy& policy, const StateSpaceModel& model);

// Per-state upper bound on steady-state estimate stddev, in state units.
struct QualityOfData {
    std::vector<double> max_stddev;  // aligned with state_names, all > 0
};

struct CertifyResult {
    bool certified = false;
    // Worst-case per-state stddev across the steady sampling cycle
    // (empty when the iteration diverges).
    std::vector<double> steady_stddevs;
    std::string rejection;  // first violated state, or a divergence note
};

// Steady-state error of the estimator under periodic sampling: predict
// `period` ticks, update on the active channels, repeat to a fixed point
// (tolerance 1e-9, cap 10,000 cycles). Certified iff every state's
// worst-case stddev within the cycle is <= its bound.
CertifyResult certify_policy(const StateSpaceModel& model, const SamplingPolicy& policy,
                             const QualityOfData& qod);

// Greedy cost reduction: repeatedly double the period, then try dropping
// each channel in schema order, keeping any change that still certifies.
// Returns the input policy unchanged when nothing improves.
SamplingPolicy adapt_policy(const StateSpaceModel& model, SamplingPolicy policy,
                            const QualityOfData& qod);

enum class TriggerDirection { rising, falling };

std::string_view to_string(TriggerDirection direction);
std::optional<TriggerDirection> parse_trigger_direction(std::string_view text);

struct Trigger {
    std::string state_name;
    double threshold = 0.0;
    TriggerDirection direction = TriggerDirection::rising;
};

struct TriggerFiring {
    std::string state_name;
    double threshold = 0.0;
    TriggerDirection direction = TriggerDirection::rising;
    double value = 0.0;  // estimate at the crossing
    Tick at = 0;
};

struct GeneralizedModel {
    StateSpaceModel model;
    Eigen::VectorXd prior_mean;
    Eigen::MatrixXd prior_covariance;
};

class ModelRegistry {
public:
    // Validates the model, requires full observability, and checks prior
    // dimensions before accepting.
    void add(const std::string& class_label, GeneralizedModel generalized);
    const GeneralizedModel* find(std::string_view class_label) const;

    // Registry preloaded with the built-in "key" model: wear_index with
    // slow drift driven by a decaying usage_rate.
    static ModelRegistry with_builtins();

private:
    std::map<std::string, GeneralizedModel, std::less<>> models_;
};

class DataProxy {
public:
    DataProxy(std::string class_label, const GeneralizedModel& generalized, Tick now);

    const std::string& class_label() const { return class_label_; }
    const StateSpaceModel& model() const { return model_; }
    const ProxyState& state() const { return state_; }
    const SamplingPolicy& policy() const { return policy_; }
    const QualityOfData& qod() const { return qod_; }

    void set_qod(QualityOfData qod);
    void add_trigger(Trigger trigger);

    bool sample_due(Tick now) const { return now % policy_.period == 0; }

    // Predict one tick; fold in a measurement over the active channels
    // when one is supplied (entries follow active_channels order).
    void step(Tick now, const std::optional<Eigen::VectorXd>& measurement);

    // Shrinks the sampling policy via adapt_policy against the stored
    // qod; returns the certification of the adapted policy.
    CertifyResult adapt();

    // Edge-triggered crossings since the previous evaluation.
    std::vector<TriggerFiring> evaluate_triggers(Tick now);

    meta::StateSnapshot snapshot(Tick now) const;

private:
    std::string class_label_;
    StateSpaceModel model_;
    ProxyState state_;
    SamplingPolicy policy_;
    QualityOfData qod_;
    std::vector<Trigger> triggers_;
    std::vector<std::optional<double>> trigger_prev_;
};

// Full-rate proxy over the class's generalized model.
DataProxy instantiate_proxy(const std::string& class_label, const ModelRegistry& registry,
                            Tick now);

}  // namespace cpseq::proxy
