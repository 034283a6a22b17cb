#pragma once

#include "hd/vh/vh_curve.hpp"

#include <json.hpp>

#include <iosfwd>

namespace hd::vh {

/// Vanilla mapping JSON plus "representatives": [{"cell": [...], "index": v}].
nlohmann::json vh_to_json(const VhMappingTable& table);
VhMappingTable vh_from_json(const nlohmann::json& doc);

/// HDMT header with layout byte 2, then u32 entry count, the on-curve
/// entries in index order, u32 representative count and the representative
/// records (u16 per coordinate of the skipped cell, u32 on-curve index).
void write_vh_binary(std::ostream& os, const VhMappingTable& table);
VhMappingTable read_vh_binary(std::istream& is);

} // namespace hd::vh
