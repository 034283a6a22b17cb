#pragma once

#include "hd/curve/guide.hpp"
#include "hd/curve/mapping.hpp"
#include "hd/vh/mask.hpp"

#include <optional>
#include <vector>

namespace hd::vh {

using curve::CurveSpec;
using curve::MappingTable;
using curve::WalkGuide;

/// Variable-length expansion of the 2D L-system. A placeholder whose square
/// holds no active cell is dropped, and the Forward next to it is lengthened
/// by the side of that square minus one, so each recursion cell keeps the
/// vanilla net displacement.
WalkGuide vh_expand(const CurveSpec& spec, const ActivationMask& mask);

/// Unit-step cell sequence of the variable-length curve, 2D or 3D, starting
/// at the origin. A pruned sub-cube is crossed in a straight line from its
/// entry corner to its exit corner.
std::vector<LatticePoint> vh_walk(const CurveSpec& spec, const ActivationMask& mask);

struct Representative {
    LatticePoint cell;
    /// Index of the on-curve cell that stands in for `cell`.
    std::uint32_t index = 0;

    friend bool operator==(const Representative&, const Representative&) = default;
};

struct VhMappingTable {
    /// On-curve region cells, numbered consecutively in visit order.
    MappingTable base;
    /// One entry per skipped region cell, in row-major cell order.
    std::vector<Representative> representatives;

    std::uint64_t on_curve_count() const { return base.entry_count(); }
    std::uint64_t skipped_count() const { return representatives.size(); }
    bool on_curve(const LatticePoint& cell) const { return base.index_of(cell).has_value(); }
    /// Curve index for any region cell: its own, or its representative's.
    std::uint32_t source_index(const LatticePoint& cell) const;

    friend bool operator==(const VhMappingTable&, const VhMappingTable&) = default;
};

/// Region and mask extents must agree.
VhMappingTable vh_mapping(const CurveSpec& spec, const Region& region, const ActivationMask& mask);

/// Nearest on-curve cell by Euclidean distance, ties to the smaller index.
/// `on_curve` is indexed by row-major region id and holds kNone for skipped
/// cells.
std::uint32_t nearest_on_curve(const Region& region, std::span<const std::uint32_t> on_curve,
                               const LatticePoint& cell);

} // namespace hd::vh
