#pragma once

#include "hd/curve/mapping.hpp"

#include <string>

namespace hd::curve {

struct SvgStyle {
    double cell = 16.0;
    double stroke_width = 2.0;
    std::string stroke = "#1f4e8c";
};

/// Standalone SVG 1.1 document with one polyline through the region cell
/// centres in index order. j runs left to right, i runs bottom to top.
/// Throws unsupported_dimension for n=3.
std::string render_svg(const MappingTable& table, const SvgStyle& style = {});

} // namespace hd::curve
