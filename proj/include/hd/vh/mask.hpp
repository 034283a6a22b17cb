#pragma once

#include "hd/curve/types.hpp"
#include "hd/tensor.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace hd::vh {

using curve::LatticePoint;
using curve::Region;

/// Boolean lattice over a region; true marks an activation cell.
class ActivationMask {
public:
    ActivationMask() = default;
    ActivationMask(Region region, std::vector<std::uint8_t> active);

    static ActivationMask filled(const Region& region, bool value);
    /// Tensor of exact 0/1 values; its shape gives the region extents.
    static ActivationMask from_tensor(const Tensor& t);
    Tensor to_tensor() const;

    const Region& region() const { return region_; }
    bool active(const LatticePoint& cell) const { return active_[region_.linear(cell)] != 0; }
    bool active_linear(std::uint64_t linear) const { return active_[linear] != 0; }
    void set(const LatticePoint& cell, bool value) { active_[region_.linear(cell)] = value ? 1 : 0; }

    std::uint64_t active_count() const;
    double active_fraction() const;

    friend bool operator==(const ActivationMask&, const ActivationMask&) = default;

private:
    Region region_;
    std::vector<std::uint8_t> active_;
};

/// Half-open axis-aligned box [lo, hi) in lattice coordinates; unused axes
/// should span [0, 1).
struct Box {
    std::array<std::int64_t, 3> lo{0, 0, 0};
    std::array<std::int64_t, 3> hi{1, 1, 1};

    static Box cube(const LatticePoint& origin, std::uint32_t side, int dims);
};

/// Summed-area table of a mask: O(1) count of active cells in any box.
/// Parts of a box outside the region count as inactive.
class ActivitySums {
public:
    explicit ActivitySums(const ActivationMask& mask);

    std::uint64_t count(const Box& box) const;
    bool any(const Box& box) const { return count(box) > 0; }

private:
    std::uint64_t at(std::int64_t i, std::int64_t j, std::int64_t k) const;

    int dims_ = 2;
    std::array<std::int64_t, 3> ext_{1, 1, 1};
    std::vector<std::uint32_t> sums_;
};

/// True iff any active cell lies in the box.
bool subtree_activity(const ActivitySums& sums, const Box& box);
bool subtree_activity(const ActivationMask& mask, const Box& box);

} // namespace hd::vh
