#include "hd/curve/types.hpp"

#include "hd/error.hpp"

#include <algorithm>
#include <sstream>

namespace hd::curve {

void CurveSpec::validate() const {
    require(n == 2 || n == 3, ErrorKind::invalid_argument,
            "curve dimension must be 2 or 3, got " + std::to_string(n));
    require(p >= 1, ErrorKind::invalid_argument, "curve order must be >= 1, got " + std::to_string(p));
    require(n * p <= 30, ErrorKind::invalid_argument,
            "curve too large: n*p must be <= 30, got " + std::to_string(n * p));
}

Region::Region(std::vector<std::uint32_t> extents) : extents_(std::move(extents)) {
    require(extents_.size() == 2 || extents_.size() == 3, ErrorKind::invalid_region,
            "region must have 2 or 3 axes");
    for (auto e : extents_) {
        require(e >= 1, ErrorKind::invalid_region, "region extents must be >= 1");
    }
}

Region Region::full(const CurveSpec& spec) {
    spec.validate();
    return Region(std::vector<std::uint32_t>(static_cast<std::size_t>(spec.n), spec.side()));
}

std::uint32_t Region::max_extent() const {
    return extents_.empty() ? 0 : *std::max_element(extents_.begin(), extents_.end());
}

std::uint64_t Region::cell_count() const {
    std::uint64_t n = extents_.empty() ? 0 : 1;
    for (auto e : extents_) {
        n *= e;
    }
    return n;
}

bool Region::contains(const LatticePoint& cell) const {
    for (std::size_t a = 0; a < extents_.size(); ++a) {
        if (cell[a] >= extents_[a]) {
            return false;
        }
    }
    for (std::size_t a = extents_.size(); a < 3; ++a) {
        if (cell[a] != 0) {
            return false;
        }
    }
    return true;
}

std::uint64_t Region::linear(const LatticePoint& cell) const {
    std::uint64_t id = 0;
    for (std::size_t a = 0; a < extents_.size(); ++a) {
        id = id * extents_[a] + cell[a];
    }
    return id;
}

LatticePoint Region::point(std::uint64_t linear) const {
    LatticePoint pt;
    for (std::size_t a = extents_.size(); a-- > 0;) {
        pt[a] = static_cast<std::uint32_t>(linear % extents_[a]);
        linear /= extents_[a];
    }
    return pt;
}

void Region::check_fits(const CurveSpec& spec) const {
    spec.validate();
    require(dims() == spec.n, ErrorKind::invalid_region,
            "region " + to_string() + " has " + std::to_string(dims()) + " axes, curve has " +
                std::to_string(spec.n));
    for (auto e : extents_) {
        require(e <= spec.side(), ErrorKind::invalid_region,
                "region " + to_string() + " exceeds curve side " + std::to_string(spec.side()));
    }
}

std::string Region::to_string() const {
    std::ostringstream os;
    for (std::size_t a = 0; a < extents_.size(); ++a) {
        os << (a ? "x" : "") << extents_[a];
    }
    return os.str();
}

int select_order(std::span<const std::int64_t> extents, int n) {
    require(n == 2 || n == 3, ErrorKind::invalid_argument, "dimension must be 2 or 3");
    require(extents.size() == static_cast<std::size_t>(n), ErrorKind::invalid_region,
            "extent count does not match dimension");
    std::int64_t largest = 0;
    for (auto e : extents) {
        require(e >= 1, ErrorKind::invalid_region, "region extents must be >= 1");
        largest = std::max(largest, e);
    }
    int p = 0;
    while ((std::int64_t{1} << p) < largest) {
        ++p;
    }
    return std::max(p, 1);
}

int select_order(const Region& region) {
    std::vector<std::int64_t> ext(region.extents().begin(), region.extents().end());
    return select_order(ext, region.dims());
}

} // namespace hd::curve
