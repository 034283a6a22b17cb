#include "hd/vh/mask.hpp"

#include "hd/error.hpp"

#include <algorithm>

namespace hd::vh {

ActivationMask::ActivationMask(Region region, std::vector<std::uint8_t> active)
    : region_(std::move(region)), active_(std::move(active)) {
    require(active_.size() == region_.cell_count(), ErrorKind::shape_mismatch,
            "mask size does not match region " + region_.to_string());
    for (auto& a : active_) {
        a = a != 0 ? 1 : 0;
    }
}

ActivationMask ActivationMask::filled(const Region& region, bool value) {
    return ActivationMask(region, std::vector<std::uint8_t>(region.cell_count(), value ? 1 : 0));
}

ActivationMask ActivationMask::from_tensor(const Tensor& t) {
    require(t.rank() == 2 || t.rank() == 3, ErrorKind::unsupported_dimension, "mask tensor must be rank 2 or 3");
    std::vector<std::uint32_t> ext;
    for (auto d : t.shape()) {
        ext.push_back(static_cast<std::uint32_t>(d));
    }
    std::vector<std::uint8_t> active(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        require(t[i] == 0.0 || t[i] == 1.0, ErrorKind::invalid_argument, "mask values must be 0 or 1");
        active[i] = t[i] == 1.0 ? 1 : 0;
    }
    return ActivationMask(Region(std::move(ext)), std::move(active));
}

Tensor ActivationMask::to_tensor() const {
    Shape shape(region_.extents().begin(), region_.extents().end());
    Tensor t(shape);
    for (std::size_t i = 0; i < active_.size(); ++i) {
        t[i] = active_[i];
    }
    return t;
}

std::uint64_t ActivationMask::active_count() const {
    return static_cast<std::uint64_t>(std::count(active_.begin(), active_.end(), std::uint8_t{1}));
}

double ActivationMask::active_fraction() const {
    return active_.empty() ? 0.0 : static_cast<double>(active_count()) / static_cast<double>(active_.size());
}

Box Box::cube(const LatticePoint& origin, std::uint32_t side, int dims) {
    Box b;
    for (int a = 0; a < dims; ++a) {
        const auto ax = static_cast<std::size_t>(a);
        b.lo[ax] = origin[ax];
        b.hi[ax] = static_cast<std::int64_t>(origin[ax]) + side;
    }
    return b;
}

ActivitySums::ActivitySums(const ActivationMask& mask) : dims_(mask.region().dims()) {
    for (int a = 0; a < dims_; ++a) {
        ext_[static_cast<std::size_t>(a)] = mask.region().extent(a);
    }
    const auto [ni, nj, nk] = ext_;
    // One row of zero padding at the low end of every axis.
    sums_.assign(static_cast<std::size_t>((ni + 1) * (nj + 1) * (nk + 1)), 0);
    auto idx = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
        return static_cast<std::size_t>((i * (nj + 1) + j) * (nk + 1) + k);
    };
    std::uint64_t lin = 0;
    for (std::int64_t i = 1; i <= ni; ++i) {
        for (std::int64_t j = 1; j <= nj; ++j) {
            for (std::int64_t k = 1; k <= nk; ++k) {
                const std::uint32_t v = mask.active_linear(lin++) ? 1u : 0u;
                sums_[idx(i, j, k)] = v + sums_[idx(i - 1, j, k)] + sums_[idx(i, j - 1, k)] +
                                      sums_[idx(i, j, k - 1)] - sums_[idx(i - 1, j - 1, k)] -
                                      sums_[idx(i - 1, j, k - 1)] - sums_[idx(i, j - 1, k - 1)] +
                                      sums_[idx(i - 1, j - 1, k - 1)];
            }
        }
    }
}

std::uint64_t ActivitySums::at(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return sums_[static_cast<std::size_t>((i * (ext_[1] + 1) + j) * (ext_[2] + 1) + k)];
}

std::uint64_t ActivitySums::count(const Box& box) const {
    std::array<std::int64_t, 3> lo{}, hi{};
    for (std::size_t a = 0; a < 3; ++a) {
        lo[a] = std::clamp<std::int64_t>(box.lo[a], 0, ext_[a]);
        hi[a] = std::clamp<std::int64_t>(box.hi[a], 0, ext_[a]);
        if (hi[a] <= lo[a]) {
            return 0;
        }
    }
    return at(hi[0], hi[1], hi[2]) - at(lo[0], hi[1], hi[2]) - at(hi[0], lo[1], hi[2]) - at(hi[0], hi[1], lo[2]) +
           at(lo[0], lo[1], hi[2]) + at(lo[0], hi[1], lo[2]) + at(hi[0], lo[1], lo[2]) - at(lo[0], lo[1], lo[2]);
}

bool subtree_activity(const ActivitySums& sums, const Box& box) { return sums.any(box); }

bool subtree_activity(const ActivationMask& mask, const Box& box) { return ActivitySums(mask).any(box); }

} // namespace hd::vh
