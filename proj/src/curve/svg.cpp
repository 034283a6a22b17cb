#include "hd/curve/svg.hpp"

#include "hd/error.hpp"

#include <cstdio>
#include <sstream>

namespace hd::curve {

namespace {
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}
} // namespace

std::string render_svg(const MappingTable& table, const SvgStyle& style) {
    require(table.spec().n == 2 && table.region().dims() == 2, ErrorKind::unsupported_dimension,
            "SVG rendering requires n=2");
    const auto& region = table.region();
    const double width = style.cell * region.extent(1);
    const double height = style.cell * region.extent(0);

    std::ostringstream pts;
    bool first = true;
    for (const auto& [cell, index] : table.entries()) {
        (void)index;
        const double x = (cell[1] + 0.5) * style.cell;
        const double y = height - (cell[0] + 0.5) * style.cell;
        pts << (first ? "" : " ") << num(x) << ',' << num(y);
        first = false;
    }

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
        << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
        << "  <polyline fill=\"none\" stroke=\"" << style.stroke << "\" stroke-width=\"" << num(style.stroke_width)
        << "\" stroke-linejoin=\"round\" points=\"" << pts.str() << "\"/>\n"
        << "</svg>\n";
    return svg.str();
}

} // namespace hd::curve
