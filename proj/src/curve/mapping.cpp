#include "hd/curve/mapping.hpp"

#include "hd/curve/transform.hpp"
#include "hd/error.hpp"

#include <algorithm>
#include <array>

namespace hd::curve {

const char* to_string(Layout layout) { return layout == Layout::padded ? "padded" : "compacted"; }

Layout parse_layout(std::string_view text) {
    if (text == "padded") {
        return Layout::padded;
    }
    if (text == "compacted") {
        return Layout::compacted;
    }
    fail(ErrorKind::invalid_argument, "unknown layout '" + std::string(text) + "'");
}

MappingTable MappingTable::from_parts(CurveSpec spec, Region region, Layout layout,
                                      std::vector<std::uint32_t> cell_to_index,
                                      std::vector<std::uint32_t> index_to_cell) {
    region.check_fits(spec);
    require(cell_to_index.size() == region.cell_count(), ErrorKind::shape_mismatch,
            "cell_to_index size does not match region");
    if (layout == Layout::padded) {
        require(index_to_cell.size() == spec.length(), ErrorKind::shape_mismatch,
                "padded code length must be 2^(n*p)");
    }
    std::uint64_t entries = 0;
    for (std::size_t cell = 0; cell < cell_to_index.size(); ++cell) {
        const auto v = cell_to_index[cell];
        if (v == kNone) {
            continue;
        }
        require(v < index_to_cell.size() && index_to_cell[v] == cell, ErrorKind::format,
                "mapping is not a bijection at cell " + std::to_string(cell));
        ++entries;
    }
    for (std::size_t v = 0; v < index_to_cell.size(); ++v) {
        const auto cell = index_to_cell[v];
        if (cell == kNone) {
            continue;
        }
        require(cell < cell_to_index.size() && cell_to_index[cell] == v, ErrorKind::format,
                "mapping is not a bijection at index " + std::to_string(v));
    }
    return MappingTable(spec, std::move(region), layout,
                        LargeVector<std::uint32_t>(cell_to_index.begin(), cell_to_index.end()),
                        LargeVector<std::uint32_t>(index_to_cell.begin(), index_to_cell.end()), entries);
}

std::optional<std::uint32_t> MappingTable::index_of(const LatticePoint& cell) const {
    require(region_.contains(cell), ErrorKind::out_of_bounds, "cell outside the mapped region");
    const auto v = cell_to_index_[region_.linear(cell)];
    if (v == kNone) {
        return std::nullopt;
    }
    return v;
}

std::optional<LatticePoint> MappingTable::cell_at(std::uint64_t index) const {
    require(index < index_to_cell_.size(), ErrorKind::out_of_bounds, "code index out of range");
    const auto cell = index_to_cell_[index];
    if (cell == kNone) {
        return std::nullopt;
    }
    return region_.point(cell);
}

std::vector<std::pair<LatticePoint, std::uint32_t>> MappingTable::entries() const {
    std::vector<std::pair<LatticePoint, std::uint32_t>> out;
    out.reserve(static_cast<std::size_t>(entries_));
    for (std::size_t v = 0; v < index_to_cell_.size(); ++v) {
        if (index_to_cell_[v] != kNone) {
            out.emplace_back(region_.point(index_to_cell_[v]), static_cast<std::uint32_t>(v));
        }
    }
    return out;
}

namespace {

// Leaf blocks: the last curve levels are replayed from precomputed per-state
// tables instead of recursing down to single cells. Blocks are 16 cells wide so
// a block row of cell_to_index is one contiguous run.
struct LeafBlocks {
    int levels = 0;
    std::uint32_t side = 1;
    std::size_t cells = 0;
    // Per state, in curve order: (di, dj, dk) and the row-major linear delta.
    std::vector<std::array<std::uint32_t, 3>> delta;
    std::vector<std::uint32_t> linear;
    // Per state, in block raster order: curve position within the block.
    std::vector<std::uint32_t> rank;
};

LeafBlocks make_leaf_blocks(const CurveSpec& spec, const TransformTable& t, std::uint32_t stride0,
                            std::uint32_t stride1) {
    LeafBlocks lb;
    lb.levels = std::min(spec.p, 4);
    lb.side = std::uint32_t{1} << lb.levels;
    lb.cells = std::size_t{1} << (spec.n * lb.levels);
    const int states = t.children * t.n;
    const auto total = lb.cells * static_cast<std::size_t>(states);
    lb.delta.reserve(total);
    lb.linear.reserve(total);
    lb.rank.resize(total);
    for (int s = 0; s < states; ++s) {
        const std::size_t first = static_cast<std::size_t>(s) * lb.cells;
        std::uint32_t q = 0;
        auto emit = [&](std::uint32_t i, std::uint32_t j, std::uint32_t k) {
            lb.delta.push_back({i, j, k});
            lb.linear.push_back(i * stride0 + j * stride1 + k);
            const std::uint32_t raster = spec.n == 3 ? (i * lb.side + j) * lb.side + k : i * lb.side + j;
            lb.rank[first + raster] = q++;
        };
        detail::traverse_level(t, s, lb.levels, 0, 0, 0, emit);
    }
    return lb;
}

template <class Fn>
void walk_blocks(const TransformTable& t, int state, int level, int leaf_levels, std::uint32_t i,
                 std::uint32_t j, std::uint32_t k, Fn& fn) {
    if (level == leaf_levels) {
        fn(state, i, j, k);
        return;
    }
    const std::uint32_t half = std::uint32_t{1} << (level - 1);
    const auto s = static_cast<std::size_t>(state);
    for (int w = 0; w < t.children; ++w) {
        const unsigned c = t.corner[s][static_cast<std::size_t>(w)];
        walk_blocks(t, t.next[s][static_cast<std::size_t>(w)], level - 1, leaf_levels, i + (c & 1u) * half,
                    j + ((c >> 1) & 1u) * half, k + ((c >> 2) & 1u) * half, fn);
    }
}

} // namespace

MappingTable build_mapping(const CurveSpec& spec, const Region& region, Layout layout) {
    region.check_fits(spec);
    const std::uint64_t cells = region.cell_count();
    const std::uint64_t length = layout == Layout::padded ? spec.length() : cells;
    const bool padded = layout == Layout::padded;
    const bool full = cells == spec.length();

    const std::uint32_t e0 = region.extent(0);
    const std::uint32_t e1 = region.extent(1);
    const std::uint32_t e2 = spec.n == 3 ? region.extent(2) : 1u;

    // Every slot is written when the region fills the hypercube, so skip the fill.
    LargeVector<std::uint32_t> c2i;
    LargeVector<std::uint32_t> i2c;
    c2i.resize(static_cast<std::size_t>(cells));
    if (full) {
        i2c.resize(static_cast<std::size_t>(length));
    } else {
        i2c.assign(static_cast<std::size_t>(length), MappingTable::kNone);
    }

    const auto& t = transform_table(spec.n);
    const LeafBlocks lb = make_leaf_blocks(spec, t, e1 * e2, e2);
    std::uint32_t* c2i_p = c2i.data();
    std::uint32_t* i2c_p = i2c.data();
    std::uint32_t v = 0;
    std::uint32_t slot = 0;

    const std::uint32_t rows = spec.n == 3 ? lb.side * lb.side : lb.side;
    const std::uint32_t row_len = lb.side;

    auto on_block = [&](int state, std::uint32_t i, std::uint32_t j, std::uint32_t k) {
        const std::size_t first = static_cast<std::size_t>(state) * lb.cells;
        const bool inside = i + lb.side <= e0 && j + lb.side <= e1 && (spec.n == 2 || k + lb.side <= e2);
        if (inside) {
            // All block cells are region cells, so padded and compacted slots
            // both advance by one per cell.
            const std::uint32_t start = padded ? v : slot;
            const std::uint32_t base = (i * e1 + j) * e2 + k;
            const std::uint32_t* off = lb.linear.data() + first;
            std::uint32_t* out = i2c_p + start;
            for (std::size_t q = 0; q < lb.cells; ++q) {
                out[q] = base + off[q];
            }
            const std::uint32_t* rank = lb.rank.data() + first;
            for (std::uint32_t r = 0; r < rows; ++r) {
                const std::uint32_t di = spec.n == 3 ? r / lb.side : r;
                const std::uint32_t dj = spec.n == 3 ? r % lb.side : 0;
                std::uint32_t* dst = c2i_p + base + di * e1 * e2 + dj * e2;
                const std::uint32_t* src = rank + static_cast<std::size_t>(r) * row_len;
                for (std::uint32_t c = 0; c < row_len; ++c) {
                    dst[c] = start + src[c];
                }
            }
            v += static_cast<std::uint32_t>(lb.cells);
            if (!padded) {
                slot += static_cast<std::uint32_t>(lb.cells);
            }
            return;
        }
        if (i >= e0 || j >= e1 || (spec.n == 3 && k >= e2)) {
            v += static_cast<std::uint32_t>(lb.cells);
            return;
        }
        for (std::size_t q = 0; q < lb.cells; ++q) {
            const auto& d = lb.delta[first + q];
            const std::uint32_t ci = i + d[0];
            const std::uint32_t cj = j + d[1];
            const std::uint32_t ck = k + d[2];
            if (ci < e0 && cj < e1 && ck < e2) {
                const std::uint32_t cell = (ci * e1 + cj) * e2 + ck;
                const std::uint32_t at = padded ? v : slot++;
                c2i_p[cell] = at;
                i2c_p[at] = cell;
            }
            ++v;
        }
    };
    walk_blocks(t, t.root_state, spec.p, lb.levels, 0, 0, 0, on_block);
    return MappingTable(spec, region, layout, std::move(c2i), std::move(i2c), cells);
}

MappingTable build_mapping(const Region& region, Layout layout) {
    return build_mapping(CurveSpec{region.dims(), select_order(region)}, region, layout);
}

} // namespace hd::curve
