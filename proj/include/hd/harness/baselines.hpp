#pragma once

#include "hd/harness/tape.hpp"

#include <span>
#include <string_view>

namespace hd::harness {

DepthReduce parse_depth_reduce(std::string_view text);
const char* to_string(DepthReduce mode);

/// Collapses a [D, W, H] map along D. conv takes a [D] kernel; the other
/// modes take none.
Tensor reduce3d(const Tensor& features, DepthReduce mode, std::span<const double> kernel = {});

} // namespace hd::harness
