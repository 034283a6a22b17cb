#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hd::curve {

/// Dimension and order of a Hilbert curve. The curve fills a hypercube of
/// side 2^p and has 2^(n*p) cells.
struct CurveSpec {
    int n = 2;
    int p = 1;

    /// Throws invalid_argument unless n is 2 or 3 and 1 <= p with n*p <= 30.
    void validate() const;

    std::uint32_t side() const { return std::uint32_t{1} << p; }
    std::uint64_t length() const { return std::uint64_t{1} << (n * p); }

    friend bool operator==(const CurveSpec&, const CurveSpec&) = default;
};

/// Lattice coordinates (i, j[, k]). Unused trailing axes stay zero.
struct LatticePoint {
    std::array<std::uint32_t, 3> coords{};

    std::uint32_t operator[](std::size_t axis) const { return coords[axis]; }
    std::uint32_t& operator[](std::size_t axis) { return coords[axis]; }

    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

/// Per-axis extents of a feature region, anchored at the lattice origin.
class Region {
public:
    Region() = default;
    explicit Region(std::vector<std::uint32_t> extents);

    static Region full(const CurveSpec& spec);

    int dims() const { return static_cast<int>(extents_.size()); }
    std::uint32_t extent(int axis) const { return extents_.at(static_cast<std::size_t>(axis)); }
    std::span<const std::uint32_t> extents() const { return extents_; }
    std::uint32_t max_extent() const;
    std::uint64_t cell_count() const;

    bool contains(const LatticePoint& cell) const;
    /// Row-major linear id of a region cell.
    std::uint64_t linear(const LatticePoint& cell) const;
    LatticePoint point(std::uint64_t linear) const;

    /// Throws invalid_region when the region does not fit the curve's hypercube.
    void check_fits(const CurveSpec& spec) const;

    std::string to_string() const;

    friend bool operator==(const Region&, const Region&) = default;

private:
    std::vector<std::uint32_t> extents_;
};

/// Smallest order whose hypercube holds the region: ceil(log2(max extent)),
/// clamped to at least 1.
int select_order(std::span<const std::int64_t> extents, int n);
int select_order(const Region& region);

} // namespace hd::curve
