#include "hd/harness/model.hpp"

#include "hd/error.hpp"

#include <cmath>
#include <random>

namespace hd::harness {

namespace {

constexpr ConvGeom kBlock{2, 1};
constexpr std::size_t kKernel = 3;

Shape kernel_shape(int dims, std::size_t out, std::size_t in) {
    Shape s{out, in};
    for (int a = 0; a < dims; ++a) {
        s.push_back(kKernel);
    }
    return s;
}

Tensor he_normal(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    Tensor t(std::move(shape));
    for (auto& v : t.values()) {
        v = g(rng);
    }
    return t;
}

Var conv(Tape& t, int dims, Var x, Var w, Var b, int depth_stride = 0) {
    return dims == 3 ? conv3d(t, x, w, b, {kBlock.stride, kBlock.pad, depth_stride}) : conv2d(t, x, w, b, kBlock);
}

} // namespace

Net init_net(const NetSpec& spec, std::uint64_t seed) {
    require(spec.dims == 2 || spec.dims == 3, ErrorKind::unsupported_dimension, "networks are 2D or 3D");
    require(spec.depth_stride >= 1, ErrorKind::invalid_argument, "depth stride must be positive");
    require(spec.in_channels > 0 && spec.width1 > 0 && spec.width2 > 0 && spec.classes > 1,
            ErrorKind::invalid_argument, "network widths must be positive");
    std::mt19937_64 rng(seed);
    const auto taps = static_cast<std::size_t>(std::pow(kKernel, spec.dims));
    Net n;
    n.spec = spec;
    n.w1 = he_normal(kernel_shape(spec.dims, spec.width1, spec.in_channels), spec.in_channels * taps, rng);
    n.b1 = Tensor({spec.width1});
    n.w2 = he_normal(kernel_shape(spec.dims, spec.width2, spec.width1), spec.width1 * taps, rng);
    n.b2 = Tensor({spec.width2});
    n.w3 = he_normal({spec.classes, spec.width2}, spec.width2, rng);
    for (auto& v : n.w3.values()) {
        v += spec.head_shift;
    }
    n.b3 = Tensor({spec.classes});
    return n;
}

NetVars bind(Tape& t, const Net& net, bool trainable) {
    const auto in = [&](const Tensor& x) { return trainable ? t.param(x) : t.constant(x); };
    return {in(net.w1), in(net.b1), in(net.w2), in(net.b2), in(net.w3), in(net.b3)};
}

Var NetTrace::layer(int index) const {
    switch (index) {
    case 1: return h1;
    case 2: return h2;
    default: fail(ErrorKind::config, "distill_layer: must be 1 or 2");
    }
}

NetTrace forward(Tape& t, const Net& net, const NetVars& v, Var input) {
    NetTrace tr;
    tr.h1 = relu(t, conv(t, net.spec.dims, input, v.w1, v.b1, net.spec.depth_stride));
    tr.h2 = relu(t, conv(t, net.spec.dims, tr.h1, v.w2, v.b2));
    tr.logits = linear(t, global_avg_pool(t, tr.h2), v.w3, v.b3);
    return tr;
}

Var logits_from(Tape& t, const Net& net, const NetVars& v, int layer, Var features) {
    require(layer == 1 || layer == 2, ErrorKind::config, "distill_layer: must be 1 or 2");
    Var h2 = layer == 1 ? relu(t, conv(t, net.spec.dims, features, v.w2, v.b2)) : features;
    return linear(t, global_avg_pool(t, h2), v.w3, v.b3);
}

void sgd_step(Net& net, Tape& t, const NetVars& v, double lr) {
    const std::pair<Tensor*, Var> params[] = {{&net.w1, v.w1}, {&net.b1, v.b1}, {&net.w2, v.w2},
                                              {&net.b2, v.b2}, {&net.w3, v.w3}, {&net.b3, v.b3}};
    for (const auto& [p, var] : params) {
        const auto& g = t.grad(var);
        for (std::size_t k = 0; k < p->size(); ++k) {
            (*p)[k] -= lr * g[k];
        }
    }
}

std::vector<int> predict(const Tensor& logits) {
    const std::size_t n = logits.dim(0), k = logits.dim(1);
    std::vector<int> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c) {
            if (logits[r * k + c] > logits[r * k + best]) {
                best = c;
            }
        }
        out[r] = static_cast<int>(best);
    }
    return out;
}

Tensor layer_values(const Net& net, const Tensor& inputs, int layer) {
    Tape t;
    const auto v = bind(t, net, false);
    return t.value(forward(t, net, v, t.constant(inputs)).layer(layer));
}

Tensor logits_values(const Net& net, const Tensor& inputs) {
    Tape t;
    const auto v = bind(t, net, false);
    return t.value(forward(t, net, v, t.constant(inputs)).logits);
}

} // namespace hd::harness
