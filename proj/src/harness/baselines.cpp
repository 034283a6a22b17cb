#include "hd/harness/baselines.hpp"

#include "hd/error.hpp"

#include <string>

namespace hd::harness {

DepthReduce parse_depth_reduce(std::string_view text) {
    if (text == "avg") {
        return DepthReduce::avg;
    }
    if (text == "max") {
        return DepthReduce::max;
    }
    if (text == "conv") {
        return DepthReduce::conv;
    }
    fail(ErrorKind::invalid_argument, "unknown reduction mode '" + std::string(text) + "'");
}

const char* to_string(DepthReduce mode) {
    switch (mode) {
    case DepthReduce::avg: return "avg";
    case DepthReduce::max: return "max";
    case DepthReduce::conv: return "conv";
    }
    return "unknown";
}

Tensor reduce3d(const Tensor& features, DepthReduce mode, std::span<const double> kernel) {
    require(features.rank() == 3, ErrorKind::shape_mismatch, "reduce3d expects a [D, W, H] tensor");
    require(features.dim(0) >= 1, ErrorKind::shape_mismatch, "reduce3d needs D >= 1");
    require(mode == DepthReduce::avg || mode == DepthReduce::max || mode == DepthReduce::conv,
            ErrorKind::invalid_argument, "unknown reduction mode");
    require(mode == DepthReduce::conv ? kernel.size() == features.dim(0) : kernel.empty(),
            ErrorKind::invalid_argument, "conv takes a [D] kernel; avg and max take none");
    Tape t;
    const Var x = t.constant(features.reshaped({1, 1, features.dim(0), features.dim(1), features.dim(2)}));
    Var w;
    if (mode == DepthReduce::conv) {
        w = t.constant(Tensor({kernel.size()}, std::vector<double>(kernel.begin(), kernel.end())));
    }
    return t.value(reduce_depth(t, x, mode, w)).reshaped({features.dim(1), features.dim(2)});
}

} // namespace hd::harness
