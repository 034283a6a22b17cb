#pragma once

#include "hd/curve/mapping.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace hd::curve {

nlohmann::json cell_json(const LatticePoint& cell, int dims);
LatticePoint cell_from_json(const nlohmann::json& c, int dims);

/// {"n", "p", "region", "layout", "entries": [{"cell": [...], "index": v}, ...]}
/// with entries sorted by index.
nlohmann::json mapping_to_json(const MappingTable& table);
MappingTable mapping_from_json(const nlohmann::json& doc);

/// HDMT v1: "HDMT", u8 version, u8 n, u8 p, u8 layout, u32 extent per axis,
/// then one (u16 per coordinate, u32 index) record per region cell in index
/// order. All integers little-endian.
void write_mapping_binary(std::ostream& os, const MappingTable& table);
MappingTable read_mapping_binary(std::istream& is);

/// Builds a table of the given code length from (cell, index) pairs. Throws
/// format on out-of-range or duplicate entries.
MappingTable assemble_mapping(const CurveSpec& spec, const Region& region, Layout layout, std::uint64_t code_length,
                              const std::vector<std::pair<LatticePoint, std::uint32_t>>& entries);

namespace hdmt {
inline constexpr std::string_view kMagic = "HDMT";
inline constexpr std::uint8_t kVersion = 1;
/// Layout byte used by variable-length tables (see vh/vh_io.hpp).
inline constexpr std::uint8_t kLayoutVariable = 2;

void write_header(std::ostream& os, const CurveSpec& spec, const Region& region, std::uint8_t layout);
struct Header {
    CurveSpec spec;
    Region region;
    std::uint8_t layout = 0;
};
Header read_header(std::istream& is);
void write_cell(std::ostream& os, const LatticePoint& cell, int n);
LatticePoint read_cell(std::istream& is, int n);
} // namespace hdmt

} // namespace hd::curve
