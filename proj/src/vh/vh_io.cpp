#include "hd/vh/vh_io.hpp"

#include "hd/curve/mapping_io.hpp"
#include "hd/io/binary.hpp"

#include <istream>
#include <ostream>

namespace hd::vh {

using nlohmann::json;

namespace {

void check_representatives(const VhMappingTable& t) {
    const auto& region = t.base.region();
    require(t.base.entry_count() + t.representatives.size() == region.cell_count(), ErrorKind::format,
            "on-curve and skipped cells do not cover the region");
    std::uint64_t last = 0;
    bool first = true;
    for (const auto& r : t.representatives) {
        require(region.contains(r.cell), ErrorKind::format, "representative cell outside region");
        require(!t.base.index_of(r.cell).has_value(), ErrorKind::format, "representative for an on-curve cell");
        require(r.index < t.base.code_length(), ErrorKind::format, "representative index out of range");
        const auto lin = region.linear(r.cell);
        require(first || lin > last, ErrorKind::format, "representatives not in row-major order");
        last = lin;
        first = false;
    }
}

} // namespace

json vh_to_json(const VhMappingTable& table) {
    json doc = curve::mapping_to_json(table.base);
    json reps = json::array();
    for (const auto& r : table.representatives) {
        reps.push_back({{"cell", curve::cell_json(r.cell, table.base.region().dims())}, {"index", r.index}});
    }
    doc["representatives"] = reps;
    return doc;
}

VhMappingTable vh_from_json(const json& doc) {
    try {
        VhMappingTable t;
        curve::CurveSpec spec{doc.at("n").get<int>(), doc.at("p").get<int>()};
        spec.validate();
        curve::Region region(doc.at("region").get<std::vector<std::uint32_t>>());
        require(region.dims() == spec.n, ErrorKind::format, "region arity does not match n");
        region.check_fits(spec);
        std::vector<std::pair<LatticePoint, std::uint32_t>> entries;
        for (const auto& e : doc.at("entries")) {
            entries.emplace_back(curve::cell_from_json(e.at("cell"), region.dims()), e.at("index").get<std::uint32_t>());
        }
        t.base = curve::assemble_mapping(spec, region, curve::parse_layout(doc.at("layout").get<std::string>()),
                                         entries.size(), entries);
        for (const auto& r : doc.at("representatives")) {
            t.representatives.push_back(
                {curve::cell_from_json(r.at("cell"), region.dims()), r.at("index").get<std::uint32_t>()});
        }
        check_representatives(t);
        return t;
    } catch (const json::exception& e) {
        fail(ErrorKind::format, std::string("malformed variable-length mapping json: ") + e.what());
    }
}

void write_vh_binary(std::ostream& os, const VhMappingTable& table) {
    const auto& base = table.base;
    const int n = base.spec().n;
    curve::hdmt::write_header(os, base.spec(), base.region(), curve::hdmt::kLayoutVariable);
    io::put_u32(os, static_cast<std::uint32_t>(base.entry_count()));
    for (const auto& [cell, index] : base.entries()) {
        curve::hdmt::write_cell(os, cell, n);
        io::put_u32(os, index);
    }
    io::put_u32(os, static_cast<std::uint32_t>(table.representatives.size()));
    for (const auto& r : table.representatives) {
        curve::hdmt::write_cell(os, r.cell, n);
        io::put_u32(os, r.index);
    }
    require(static_cast<bool>(os), ErrorKind::io, "write failed");
}

VhMappingTable read_vh_binary(std::istream& is) {
    const auto h = curve::hdmt::read_header(is);
    require(h.layout == curve::hdmt::kLayoutVariable, ErrorKind::format, "HDMT layout byte is not variable-length");
    const auto cells = h.region.cell_count();
    const auto count = io::get_u32(is);
    require(count <= cells, ErrorKind::format, "entry count exceeds region");
    std::vector<std::pair<LatticePoint, std::uint32_t>> entries;
    for (std::uint32_t e = 0; e < count; ++e) {
        const auto cell = curve::hdmt::read_cell(is, h.spec.n);
        entries.emplace_back(cell, io::get_u32(is));
    }
    VhMappingTable t;
    t.base = curve::assemble_mapping(h.spec, h.region, curve::Layout::compacted, count, entries);
    const auto reps = io::get_u32(is);
    require(reps <= cells, ErrorKind::format, "representative count exceeds region");
    for (std::uint32_t r = 0; r < reps; ++r) {
        const auto cell = curve::hdmt::read_cell(is, h.spec.n);
        t.representatives.push_back({cell, io::get_u32(is)});
    }
    io::expect_eof(is);
    check_representatives(t);
    return t;
}

} // namespace hd::vh
