#include "hd/curve/mapping_io.hpp"

#include "hd/io/binary.hpp"

#include <istream>
#include <ostream>

namespace hd::curve {

using nlohmann::json;

json cell_json(const LatticePoint& cell, int dims) {
    json c = json::array();
    for (int a = 0; a < dims; ++a) {
        c.push_back(cell[static_cast<std::size_t>(a)]);
    }
    return c;
}

LatticePoint cell_from_json(const json& c, int dims) {
    require(c.is_array() && static_cast<int>(c.size()) == dims, ErrorKind::format, "cell arity mismatch");
    LatticePoint p;
    for (int a = 0; a < dims; ++a) {
        p[static_cast<std::size_t>(a)] = c.at(static_cast<std::size_t>(a)).get<std::uint32_t>();
    }
    return p;
}

namespace {

std::uint64_t code_length_for(const CurveSpec& spec, const Region& region, Layout layout) {
    return layout == Layout::padded ? spec.length() : region.cell_count();
}

MappingTable assemble(const CurveSpec& spec, const Region& region, Layout layout,
                      const std::vector<std::pair<LatticePoint, std::uint32_t>>& entries) {
    return assemble_mapping(spec, region, layout, code_length_for(spec, region, layout), entries);
}

} // namespace

MappingTable assemble_mapping(const CurveSpec& spec, const Region& region, Layout layout, std::uint64_t length,
                              const std::vector<std::pair<LatticePoint, std::uint32_t>>& entries) {
    std::vector<std::uint32_t> c2i(region.cell_count(), MappingTable::kNone);
    std::vector<std::uint32_t> i2c(length, MappingTable::kNone);
    for (const auto& [cell, index] : entries) {
        require(region.contains(cell), ErrorKind::format, "entry cell outside region");
        require(index < length, ErrorKind::format, "entry index beyond code length");
        const auto lin = region.linear(cell);
        require(c2i[lin] == MappingTable::kNone && i2c[index] == MappingTable::kNone, ErrorKind::format,
                "duplicate entry");
        c2i[lin] = index;
        i2c[index] = static_cast<std::uint32_t>(lin);
    }
    return MappingTable::from_parts(spec, region, layout, std::move(c2i), std::move(i2c));
}

json mapping_to_json(const MappingTable& table) {
    const int dims = table.region().dims();
    json entries = json::array();
    for (const auto& [cell, index] : table.entries()) {
        entries.push_back({{"cell", cell_json(cell, dims)}, {"index", index}});
    }
    json region = json::array();
    for (auto e : table.region().extents()) {
        region.push_back(e);
    }
    return {{"n", table.spec().n},
            {"p", table.spec().p},
            {"region", region},
            {"layout", to_string(table.layout())},
            {"entries", entries}};
}

MappingTable mapping_from_json(const json& doc) {
    try {
        CurveSpec spec{doc.at("n").get<int>(), doc.at("p").get<int>()};
        spec.validate();
        Region region(doc.at("region").get<std::vector<std::uint32_t>>());
        require(region.dims() == spec.n, ErrorKind::format, "region arity does not match n");
        region.check_fits(spec);
        const Layout layout = parse_layout(doc.at("layout").get<std::string>());
        std::vector<std::pair<LatticePoint, std::uint32_t>> entries;
        for (const auto& e : doc.at("entries")) {
            entries.emplace_back(cell_from_json(e.at("cell"), region.dims()), e.at("index").get<std::uint32_t>());
        }
        return assemble(spec, region, layout, entries);
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("malformed mapping json: ") + e.what());
    }
}

namespace hdmt {

void write_header(std::ostream& os, const CurveSpec& spec, const Region& region, std::uint8_t layout) {
    io::put_magic(os, kMagic);
    io::put_u8(os, kVersion);
    io::put_u8(os, static_cast<std::uint8_t>(spec.n));
    io::put_u8(os, static_cast<std::uint8_t>(spec.p));
    io::put_u8(os, layout);
    for (auto e : region.extents()) {
        io::put_u32(os, e);
    }
}

Header read_header(std::istream& is) {
    io::expect_magic(is, kMagic);
    const auto version = io::get_u8(is);
    require(version == kVersion, ErrorKind::format, "unsupported HDMT version " + std::to_string(version));
    Header h;
    h.spec.n = io::get_u8(is);
    h.spec.p = io::get_u8(is);
    try {
        h.spec.validate();
    } catch (const Error& e) {
        fail(ErrorKind::format, std::string("bad HDMT header: ") + e.what());
    }
    h.layout = io::get_u8(is);
    std::vector<std::uint32_t> extents(static_cast<std::size_t>(h.spec.n));
    for (auto& e : extents) {
        e = io::get_u32(is);
    }
    h.region = Region(std::move(extents));
    h.region.check_fits(h.spec);
    return h;
}

void write_cell(std::ostream& os, const LatticePoint& cell, int n) {
    for (int a = 0; a < n; ++a) {
        io::put_u16(os, static_cast<std::uint16_t>(cell[static_cast<std::size_t>(a)]));
    }
}

LatticePoint read_cell(std::istream& is, int n) {
    LatticePoint p;
    for (int a = 0; a < n; ++a) {
        p[static_cast<std::size_t>(a)] = io::get_u16(is);
    }
    return p;
}

} // namespace hdmt

void write_mapping_binary(std::ostream& os, const MappingTable& table) {
    const int n = table.spec().n;
    require(table.spec().side() <= 65536u, ErrorKind::invalid_argument, "HDMT coordinates are 16-bit");
    hdmt::write_header(os, table.spec(), table.region(), static_cast<std::uint8_t>(table.layout()));
    const auto i2c = table.index_to_cell();
    for (std::size_t v = 0; v < i2c.size(); ++v) {
        if (i2c[v] == MappingTable::kNone) {
            continue;
        }
        hdmt::write_cell(os, table.region().point(i2c[v]), n);
        io::put_u32(os, static_cast<std::uint32_t>(v));
    }
    require(static_cast<bool>(os), ErrorKind::io, "write failed");
}

MappingTable read_mapping_binary(std::istream& is) {
    const auto h = hdmt::read_header(is);
    require(h.layout <= 1, ErrorKind::format, "HDMT layout byte is not a vanilla layout");
    const Layout layout = static_cast<Layout>(h.layout);
    // Vanilla tables always map every region cell.
    std::vector<std::pair<LatticePoint, std::uint32_t>> entries;
    entries.reserve(h.region.cell_count());
    for (std::uint64_t e = 0; e < h.region.cell_count(); ++e) {
        const auto cell = hdmt::read_cell(is, h.spec.n);
        entries.emplace_back(cell, io::get_u32(is));
    }
    io::expect_eof(is);
    return assemble(h.spec, h.region, layout, entries);
}

} // namespace hd::curve
