#pragma once

#include "hd/losses/code.hpp"

#include <optional>
#include <vector>

namespace hd::losses {

struct LossOptions {
    RescaleMode rescale = RescaleMode::left;
};

/// Loss value with gradients with respect to the raw codes. grad_teacher has
/// the teacher's original (pre-rescale) length.
struct CodeLoss {
    double value = 0.0;
    std::vector<double> grad_teacher;
    std::vector<double> grad_student;
};

/// Loss value with gradients shaped like the feature maps (and, for the
/// weighted loss, like the activation maps).
struct LossReport {
    double value = 0.0;
    Tensor grad_student;
    std::optional<Tensor> grad_teacher;
    std::optional<Tensor> grad_am_student;
    std::optional<Tensor> grad_am_teacher;
};

/// || R(t)/||R(t)||_2 - s/||s||_2 ||_1, summed over slots. The teacher code is
/// rescaled to the student length. Throws degenerate_input if either
/// normalised vector would divide by zero.
CodeLoss hd_loss(const LinearCode& teacher, const LinearCode& student, const LossOptions& opts = {});

/// Feature-level form: maps both tensors, evaluates the loss and scatters
/// the gradients back onto the lattices.
LossReport hd_loss(const Tensor& eta_t, const MappingTable& table_t, const Tensor& eta_s,
                   const MappingTable& table_s, const LossOptions& opts = {});

/// Same loss on activation-weighted codes eta * AM.
LossReport vhd_loss(const Tensor& eta_t, const Tensor& am_t, const MappingTable& table_t, const Tensor& eta_s,
                    const Tensor& am_s, const MappingTable& table_s, const LossOptions& opts = {});

/// Channel-stacked forms: eta_t is [C, teacher spatial...], eta_s is
/// [C, student spatial...]; the per-channel losses are averaged. Activation
/// maps are shared by all channels.
LossReport hd_loss_stacked(const Tensor& eta_t, const MappingTable& table_t, const Tensor& eta_s,
                           const MappingTable& table_s, const LossOptions& opts = {});
LossReport vhd_loss_stacked(const Tensor& eta_t, const Tensor& am_t, const MappingTable& table_t,
                            const Tensor& eta_s, const Tensor& am_s, const MappingTable& table_s,
                            const LossOptions& opts = {});

/// ce + alpha * distill; alpha must be non-negative.
double total_loss(double ce, double distill, double alpha);

/// Length-preserving affine layer on codes.
struct AlignLayer {
    /// Row-major L x L.
    std::vector<double> weights;
    std::vector<double> bias;

    static AlignLayer identity(std::size_t length);
    std::size_t length() const { return bias.size(); }
};

LinearCode fc_align(const LinearCode& code, const AlignLayer& layer);

struct AlignGrads {
    std::vector<double> code;
    std::vector<double> weights;
    std::vector<double> bias;
};

/// Gradients of a scalar through fc_align given dL/d(output).
AlignGrads fc_align_backward(const LinearCode& code, const AlignLayer& layer, std::span<const double> grad_out);

} // namespace hd::losses
