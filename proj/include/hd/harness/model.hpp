#pragma once

#include "hd/harness/tape.hpp"

#include <cstdint>

namespace hd::harness {

/// conv(k3, s2, p1) -> ReLU -> conv(k3, s2, p1) -> ReLU -> global pool -> linear.
/// dims 3 gives the volumetric teacher, dims 2 the slice student.
struct NetSpec {
    int dims = 2;
    std::size_t in_channels = 1;
    std::size_t width1 = 4;
    std::size_t width2 = 8;
    std::size_t classes = 4;
    /// Depth stride of the first 3D block.
    int depth_stride = 2;
    /// Added to every head weight at init. Softmax ignores a shift shared by
    /// all classes, so this only moves the class-summed head weights.
    double head_shift = 0.0;

    friend bool operator==(const NetSpec&, const NetSpec&) = default;
};

struct Net {
    NetSpec spec;
    Tensor w1, b1, w2, b2, w3, b3;

    friend bool operator==(const Net&, const Net&) = default;
};

/// He-normal convolution and linear weights, zero biases.
Net init_net(const NetSpec& spec, std::uint64_t seed);

struct NetVars {
    Var w1, b1, w2, b2, w3, b3;
};

NetVars bind(Tape& t, const Net& net, bool trainable);

/// h1 and h2 are the post-ReLU block outputs (layers 1 and 2).
struct NetTrace {
    Var h1, h2, logits;

    Var layer(int index) const;
};

NetTrace forward(Tape& t, const Net& net, const NetVars& v, Var input);

/// Logits computed from the output of `layer`, re-entering the network there.
Var logits_from(Tape& t, const Net& net, const NetVars& v, int layer, Var features);

/// Plain SGD on every parameter bound in v.
void sgd_step(Net& net, Tape& t, const NetVars& v, double lr);

/// Row-major argmax of [N, K] logits.
std::vector<int> predict(const Tensor& logits);

/// Layer output values for a whole batch, without gradients.
Tensor layer_values(const Net& net, const Tensor& inputs, int layer);
Tensor logits_values(const Net& net, const Tensor& inputs);

} // namespace hd::harness
