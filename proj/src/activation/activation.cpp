#include "hd/activation/activation.hpp"

#include "hd/error.hpp"

#include <cmath>

namespace hd::activation {

GradientStack GradientStack::per_class(Tensor grads) {
    require(grads.rank() >= 3, ErrorKind::shape_mismatch, "per-class gradients need [classes, channels, spatial...]");
    GradientStack g;
    g.classes = grads.dim(0);
    g.grads = std::move(grads);
    g.accumulated = false;
    return g;
}

GradientStack GradientStack::summed(Tensor grads, std::size_t classes) {
    require(grads.rank() >= 2, ErrorKind::shape_mismatch, "summed gradients need [channels, spatial...]");
    require(classes >= 1, ErrorKind::invalid_argument, "class count must be positive");
    GradientStack g;
    g.grads = std::move(grads);
    g.classes = classes;
    g.accumulated = true;
    return g;
}

std::size_t GradientStack::channels() const { return grads.dim(accumulated ? 0 : 1); }

std::size_t GradientStack::positions() const {
    const std::size_t lead = accumulated ? 1 : 2;
    std::size_t z = 1;
    for (std::size_t a = lead; a < grads.rank(); ++a) {
        z *= grads.dim(a);
    }
    return z;
}

std::vector<double> channel_weights(const GradientStack& g) {
    require(g.grads.size() > 0 && g.classes > 0, ErrorKind::invalid_argument, "empty gradient stack");
    require(g.grads.all_finite(), ErrorKind::non_finite, "gradient stack has non-finite values");
    const std::size_t ch = g.channels();
    const std::size_t z = g.positions();
    const std::size_t blocks = g.accumulated ? 1 : g.classes;
    std::vector<double> gamma(ch, 0.0);
    const double* d = g.grads.data();
    for (std::size_t c = 0; c < blocks; ++c) {
        for (std::size_t k = 0; k < ch; ++k) {
            const double* row = d + (c * ch + k) * z;
            for (std::size_t x = 0; x < z; ++x) {
                gamma[k] += row[x];
            }
        }
    }
    const double scale = 1.0 / (static_cast<double>(z) * static_cast<double>(g.classes));
    for (auto& v : gamma) {
        v *= scale;
    }
    return gamma;
}

Tensor activation_map(const Tensor& features, const std::vector<double>& gamma) {
    require(features.rank() >= 2, ErrorKind::shape_mismatch, "features need [channels, spatial...]");
    require(features.dim(0) == gamma.size(), ErrorKind::shape_mismatch,
            "feature channels (" + std::to_string(features.dim(0)) + ") do not match weights (" +
                std::to_string(gamma.size()) + ")");
    Shape spatial(features.shape().begin() + 1, features.shape().end());
    Tensor am(spatial);
    const std::size_t z = am.size();
    for (std::size_t k = 0; k < gamma.size(); ++k) {
        const double* f = features.data() + k * z;
        for (std::size_t x = 0; x < z; ++x) {
            am[x] += gamma[k] * f[x];
        }
    }
    return am;
}

double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

vh::ActivationMask activation_mask(const Tensor& am, double theta) {
    require(theta > 0.0 && theta < 1.0, ErrorKind::invalid_argument, "threshold must lie in (0, 1)");
    require(am.rank() == 2 || am.rank() == 3, ErrorKind::unsupported_dimension, "activation map must be 2D or 3D");
    std::vector<std::uint32_t> ext(am.shape().begin(), am.shape().end());
    std::vector<std::uint8_t> active(am.size());
    for (std::size_t x = 0; x < am.size(); ++x) {
        active[x] = sigmoid(am[x]) > theta ? 1 : 0;
    }
    return vh::ActivationMask(vh::Region(std::move(ext)), std::move(active));
}

} // namespace hd::activation
