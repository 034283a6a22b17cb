#pragma once

#include "hd/tensor.hpp"
#include "hd/vh/mask.hpp"

#include <cstddef>
#include <vector>

namespace hd::activation {

inline constexpr double kDefaultThreshold = 0.5;

/// Gradients of class scores with respect to a feature stack.
///
/// Per-class form: shape [classes, channels, spatial...]. Accumulated form:
/// shape [channels, spatial...] already summed over `classes` classes.
struct GradientStack {
    Tensor grads;
    std::size_t classes = 1;
    bool accumulated = false;

    static GradientStack per_class(Tensor grads);
    static GradientStack summed(Tensor grads, std::size_t classes);

    std::size_t channels() const;
    /// Spatial positions per map (z).
    std::size_t positions() const;
};

/// gamma_ch = sum over classes and positions of the gradient / (z * c).
std::vector<double> channel_weights(const GradientStack& grads);

/// AM(x) = sum_ch gamma_ch * features[ch](x); features are [channels, spatial...].
Tensor activation_map(const Tensor& features, const std::vector<double>& gamma);

double sigmoid(double x);

/// Active iff sigmoid(AM) > theta, strictly; theta must lie in (0, 1).
vh::ActivationMask activation_mask(const Tensor& am, double theta = kDefaultThreshold);

} // namespace hd::activation
