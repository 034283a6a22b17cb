#pragma once

#include "hd/curve/types.hpp"
#include "hd/large_buffer.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hd::curve {

enum class Layout : std::uint8_t {
    /// Code slots keep the full-space curve index; length 2^(n*p).
    padded = 0,
    /// Region cells renumbered consecutively in curve order.
    compacted = 1,
};

const char* to_string(Layout layout);
Layout parse_layout(std::string_view text);

/// Bijection between region cells and code slots. Immutable once built.
class MappingTable {
public:
    static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

    MappingTable() = default;

    /// Validating constructor: the two maps must be mutual inverses over their
    /// mapped entries. cell_to_index is indexed by row-major region cell id and
    /// may hold kNone for unmapped cells; index_to_cell has code_length entries
    /// and holds kNone for invalid (padding) slots.
    static MappingTable from_parts(CurveSpec spec, Region region, Layout layout,
                                   std::vector<std::uint32_t> cell_to_index,
                                   std::vector<std::uint32_t> index_to_cell);

    const CurveSpec& spec() const { return spec_; }
    const Region& region() const { return region_; }
    Layout layout() const { return layout_; }
    std::uint64_t code_length() const { return index_to_cell_.size(); }
    /// Number of mapped region cells.
    std::uint64_t entry_count() const { return entries_; }

    /// Code slot of a region cell, or nullopt if the cell is unmapped.
    std::optional<std::uint32_t> index_of(const LatticePoint& cell) const;
    std::optional<LatticePoint> cell_at(std::uint64_t index) const;
    bool valid(std::uint64_t index) const { return index_to_cell_[index] != kNone; }

    std::span<const std::uint32_t> cell_to_index() const { return cell_to_index_; }
    std::span<const std::uint32_t> index_to_cell() const { return index_to_cell_; }

    /// (cell, index) pairs sorted by index.
    std::vector<std::pair<LatticePoint, std::uint32_t>> entries() const;

    friend bool operator==(const MappingTable&, const MappingTable&) = default;

private:
    friend MappingTable build_mapping(const CurveSpec&, const Region&, Layout);

    MappingTable(CurveSpec spec, Region region, Layout layout, LargeVector<std::uint32_t> c2i,
                 LargeVector<std::uint32_t> i2c, std::uint64_t entries)
        : spec_(spec), region_(std::move(region)), layout_(layout), cell_to_index_(std::move(c2i)),
          index_to_cell_(std::move(i2c)), entries_(entries) {}

    CurveSpec spec_;
    Region region_;
    Layout layout_ = Layout::padded;
    LargeVector<std::uint32_t> cell_to_index_;
    LargeVector<std::uint32_t> index_to_cell_;
    std::uint64_t entries_ = 0;
};

/// Walks the full-space curve and records the region cells it visits.
MappingTable build_mapping(const CurveSpec& spec, const Region& region, Layout layout = Layout::padded);

/// Convenience overload: order chosen by select_order.
MappingTable build_mapping(const Region& region, Layout layout = Layout::padded);

} // namespace hd::curve
