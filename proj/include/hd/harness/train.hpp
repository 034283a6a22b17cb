#pragma once

#include "hd/harness/config.hpp"
#include "hd/harness/data.hpp"
#include "hd/harness/model.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace hd::harness {

struct RunReport {
    /// "teacher" or "student".
    std::string role;
    LossKind loss_kind = LossKind::none;
    std::uint64_t seed = 0;
    /// Mean total loss per epoch.
    std::vector<double> epoch_loss;
    /// Mean distillation term per epoch (empty for none and teacher runs).
    std::vector<double> epoch_distill;
    double train_accuracy = 0.0;
    /// Percent in [0, 100].
    double test_accuracy = 0.0;
    /// Channel pairs dropped from the distillation loss for zero norm.
    std::size_t skipped_pairs = 0;
    /// Mean fraction of teacher positions above theta (vhd runs only).
    double active_fraction = 0.0;
    HarnessConfig config;

    friend bool operator==(const RunReport& a, const RunReport& b) {
        return a.role == b.role && a.loss_kind == b.loss_kind && a.seed == b.seed && a.epoch_loss == b.epoch_loss &&
               a.epoch_distill == b.epoch_distill && a.train_accuracy == b.train_accuracy &&
               a.test_accuracy == b.test_accuracy && a.skipped_pairs == b.skipped_pairs &&
               a.active_fraction == b.active_fraction;
    }
};

struct Teacher {
    Net net;
    RunReport report;
};

NetSpec teacher_spec(const HarnessConfig& config);
NetSpec student_spec(const HarnessConfig& config);

/// Percent of `index` rows whose argmax logit equals the label.
double accuracy(const Net& net, const Tensor& inputs, const std::vector<int>& labels,
                const std::vector<std::size_t>& index);

/// Trains the 3D network on volumes with cross-entropy. Throws non_finite on
/// divergence.
Teacher train_teacher(const SynthDataset& data, const HarnessConfig& config);

/// Trains the 2D network on middle slices with cross-entropy plus
/// alpha * distillation for loss_kind != none. The teacher is read only.
RunReport train_student(const SynthDataset& data, const Teacher* teacher, const HarnessConfig& config);

/// Activation maps of a layer, [N, spatial...]: per sample, channel weights
/// from the gradient of the summed class scores, then the weighted channel sum.
Tensor activation_maps(const Net& net, const Tensor& inputs, int layer);

nlohmann::json to_json(const RunReport& report);
/// Aligned-column summary.
std::string to_text(const std::vector<RunReport>& reports);

} // namespace hd::harness
