#include "hd/curve/guide.hpp"
#include "hd/curve/mapping.hpp"
#include "hd/error.hpp"
#include "hd/vh/mask.hpp"
#include "hd/vh/vh_curve.hpp"
#include "hd/vh/vh_io.hpp"

#include <doctest.h>

#include <bit>
#include <random>
#include <set>
#include <sstream>

using namespace hd;
using namespace hd::vh;
using hd::curve::build_mapping;
using hd::curve::expand_guides;
using hd::curve::Layout;
using hd::curve::render_guide;
using hd::curve::walk_guide;

namespace {

LatticePoint pt(std::uint32_t i, std::uint32_t j, std::uint32_t k = 0) { return LatticePoint{{i, j, k}}; }

/// Active rows i = 2..3 of a 4x4 lattice: the two upper quadrants.
ActivationMask upper_half_mask() {
    auto m = ActivationMask::filled(Region({4, 4}), false);
    for (std::uint32_t i = 2; i < 4; ++i) {
        for (std::uint32_t j = 0; j < 4; ++j) {
            m.set(pt(i, j), true);
        }
    }
    return m;
}

ActivationMask random_mask(const Region& r, double fraction, std::mt19937& rng) {
    std::bernoulli_distribution on(fraction);
    std::vector<std::uint8_t> a(r.cell_count());
    for (auto& v : a) {
        v = on(rng) ? 1 : 0;
    }
    return ActivationMask(r, a);
}

bool brute_any(const ActivationMask& m, const Box& b) {
    const auto& r = m.region();
    for (std::uint64_t lin = 0; lin < r.cell_count(); ++lin) {
        const auto c = r.point(lin);
        bool inside = true;
        for (int a = 0; a < r.dims(); ++a) {
            const auto ax = static_cast<std::size_t>(a);
            inside = inside && static_cast<std::int64_t>(c[ax]) >= b.lo[ax] &&
                     static_cast<std::int64_t>(c[ax]) < b.hi[ax];
        }
        if (inside && m.active(c)) {
            return true;
        }
    }
    return false;
}

/// Brute-force nearest on-curve cell.
std::uint32_t brute_nearest(const VhMappingTable& t, const LatticePoint& cell) {
    std::int64_t best_d2 = -1;
    std::uint32_t best = 0;
    for (const auto& [c, v] : t.base.entries()) {
        std::int64_t d2 = 0;
        for (std::size_t a = 0; a < 3; ++a) {
            const std::int64_t d = static_cast<std::int64_t>(c[a]) - static_cast<std::int64_t>(cell[a]);
            d2 += d * d;
        }
        if (best_d2 < 0 || d2 < best_d2 || (d2 == best_d2 && v < best)) {
            best_d2 = d2;
            best = v;
        }
    }
    return best;
}

} // namespace

TEST_CASE("subtree activity on trivial masks") {
    const auto none = ActivationMask::filled(Region({8, 8}), false);
    CHECK_FALSE(subtree_activity(none, Box::cube(pt(0, 0), 8, 2)));
    CHECK_FALSE(subtree_activity(none, Box::cube(pt(4, 4), 4, 2)));
    auto one = none;
    one.set(pt(0, 0), true);
    CHECK(subtree_activity(one, Box::cube(pt(0, 0), 2, 2)));
    CHECK_FALSE(subtree_activity(one, Box::cube(pt(0, 2), 2, 2)));
}

TEST_CASE("subtree activity matches a brute-force scan") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_mask(Region({8, 8}), 0.05 + 0.02 * trial, rng);
        const ActivitySums sums(m);
        for (std::uint32_t s : {4u, 2u}) {
            for (std::uint32_t i = 0; i < 8; i += s) {
                for (std::uint32_t j = 0; j < 8; j += s) {
                    const auto b = Box::cube(pt(i, j), s, 2);
                    CHECK(subtree_activity(sums, b) == brute_any(m, b));
                }
            }
        }
    }
    // Boxes that overhang a 3D region.
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_mask(Region({5, 7, 6}), 0.03, rng);
        const ActivitySums sums(m);
        for (std::uint32_t s : {8u, 4u, 2u}) {
            for (std::uint32_t i = 0; i < 8; i += s) {
                for (std::uint32_t j = 0; j < 8; j += s) {
                    for (std::uint32_t k = 0; k < 8; k += s) {
                        const auto b = Box::cube(pt(i, j, k), s, 3);
                        CHECK(sums.any(b) == brute_any(m, b));
                    }
                }
            }
        }
    }
}

TEST_CASE("all-active mask reproduces the vanilla guide") {
    for (int p = 1; p <= 5; ++p) {
        const curve::CurveSpec s{2, p};
        const auto m = ActivationMask::filled(Region::full(s), true);
        CHECK(vh_expand(s, m) == expand_guides(s));
    }
}

TEST_CASE("two upper quadrants active at order 2") {
    const curve::CurveSpec s{2, 2};
    const auto g = vh_expand(s, upper_half_mask());
    CHECK(render_guide(g) == "⊕▷▷▷⊖▷⊖▷⊕▷⊕▷⊖▷⊖▷▷▷⊕");
    CHECK(g.unit_moves() == 11u);

    const auto t = vh_mapping(s, Region({4, 4}), upper_half_mask());
    CHECK(t.on_curve_count() == 12u);
    CHECK(t.skipped_count() == 4u);
    std::set<std::pair<std::uint32_t, std::uint32_t>> skipped;
    for (const auto& r : t.representatives) {
        skipped.insert({r.cell[0], r.cell[1]});
        CHECK(r.index == brute_nearest(t, r.cell));
    }
    CHECK(skipped == std::set<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}, {1, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("no active cells") {
    const curve::CurveSpec s{2, 2};
    const auto g = vh_expand(s, ActivationMask::filled(Region({4, 4}), false));
    CHECK(render_guide(g) == "⊕▷▷⊖▷▷▷⊖▷▷⊕");
    for (int p = 1; p <= 6; ++p) {
        const curve::CurveSpec sp{2, p};
        const auto side = sp.side();
        const auto empty = ActivationMask::filled(Region::full(sp), false);
        const auto guide = vh_expand(sp, empty);
        const auto cells = walk_guide(guide, side);
        // Same end point as the vanilla curve.
        CHECK(cells.back() == pt(0, side - 1));
        CHECK(guide.unit_moves() == (p == 1 ? 3u : 4u * (side / 2) - 1));
    }
    const curve::CurveSpec s3{3, 3};
    const auto walk3 = vh_walk(s3, ActivationMask::filled(Region::full(s3), false));
    CHECK(walk3.size() == 8u * 4u);
}

TEST_CASE("guide walk and transform descent agree in 2D") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        const int p = 1 + trial % 5;
        const curve::CurveSpec s{2, p};
        const auto m = random_mask(Region::full(s), 0.02 + 0.01 * (trial % 20), rng);
        const auto cells = walk_guide(vh_expand(s, m), s.side());
        CHECK(cells == vh_walk(s, m));
        CHECK(cells.back() == pt(0, s.side() - 1));
    }
}

TEST_CASE("all-active mapping equals the vanilla compacted mapping") {
    for (auto [n, p] : {std::pair{2, 3}, std::pair{3, 2}}) {
        const curve::CurveSpec s{n, p};
        for (const auto& r : {Region::full(s), n == 2 ? Region({5, 7}) : Region({3, 4, 2})}) {
            const auto t = vh_mapping(s, r, ActivationMask::filled(r, true));
            CHECK(t.base == build_mapping(s, r, Layout::compacted));
            CHECK(t.representatives.empty());
        }
    }
}

TEST_CASE("representative ties go to the smaller index") {
    const Region r({1, 3});
    const std::uint32_t none = curve::MappingTable::kNone;
    const std::vector<std::uint32_t> a = {5, none, 2};
    const std::vector<std::uint32_t> b = {2, none, 5};
    CHECK(nearest_on_curve(r, a, pt(0, 1)) == 2u);
    CHECK(nearest_on_curve(r, b, pt(0, 1)) == 2u);
    // Distance beats index.
    const Region r2({3, 3});
    std::vector<std::uint32_t> c(9, none);
    c[0] = 7; // (0,0), distance^2 2 from (1,1)
    c[7] = 1; // (2,1), distance^2 1
    CHECK(nearest_on_curve(r2, c, pt(1, 1)) == 1u);
}

TEST_CASE("coverage, connectivity and amplification on random masks") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> frac(0.05, 0.5);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 2;
        const int p = 2 + (trial / 2) % (n == 2 ? 3 : 2);
        const curve::CurveSpec s{n, p};
        std::vector<std::uint32_t> ext;
        for (int a = 0; a < n; ++a) {
            ext.push_back(trial % 3 == 0 ? s.side() - 1 : s.side());
        }
        const Region r(ext);
        const auto m = random_mask(r, frac(rng), rng);
        const auto walk = vh_walk(s, m);
        for (std::size_t v = 1; v < walk.size(); ++v) {
            int axes = 0;
            std::uint32_t len = 0;
            for (std::size_t a = 0; a < 3; ++a) {
                if (walk[v][a] != walk[v - 1][a]) {
                    ++axes;
                    len = walk[v][a] > walk[v - 1][a] ? walk[v][a] - walk[v - 1][a] : walk[v - 1][a] - walk[v][a];
                }
            }
            CHECK(axes == 1);
            CHECK(std::has_single_bit(len));
        }
        const auto t = vh_mapping(s, r, m);
        CHECK(t.on_curve_count() + t.skipped_count() == r.cell_count());
        std::uint64_t active_on = 0;
        for (std::uint64_t lin = 0; lin < r.cell_count(); ++lin) {
            const auto c = r.point(lin);
            if (m.active(c)) {
                CHECK(t.on_curve(c));
                ++active_on;
            }
        }
        if (m.active_count() > 0 && m.active_count() < r.cell_count()) {
            const double on_frac = static_cast<double>(active_on) / static_cast<double>(t.on_curve_count());
            CHECK(on_frac >= m.active_fraction());
        }
        for (const auto& rep : t.representatives) {
            CHECK(rep.index == brute_nearest(t, rep.cell));
            CHECK(t.source_index(rep.cell) == rep.index);
        }
    }
}

TEST_CASE("variable-length table round trips") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 2;
        const curve::CurveSpec s{n, 3};
        const Region r(n == 2 ? std::vector<std::uint32_t>{7, 8} : std::vector<std::uint32_t>{5, 7, 7});
        const auto t = vh_mapping(s, r, random_mask(r, 0.1, rng));
        std::stringstream ss;
        write_vh_binary(ss, t);
        CHECK(read_vh_binary(ss) == t);
        CHECK(vh_from_json(nlohmann::json::parse(vh_to_json(t).dump())) == t);
    }
}

TEST_CASE("mask validation") {
    CHECK_THROWS_AS(ActivationMask::from_tensor(Tensor({2, 2}, {0, 1, 0.5, 1})), Error);
    const auto m = ActivationMask::from_tensor(Tensor({2, 2}, {0, 1, 1, 0}));
    CHECK(m.active_count() == 2u);
    CHECK(m.to_tensor() == Tensor({2, 2}, {0, 1, 1, 0}));
    const curve::CurveSpec s{2, 2};
    CHECK_THROWS_AS(vh_mapping(s, Region({4, 4}), ActivationMask::filled(Region({3, 4}), true)), Error);
    CHECK_THROWS_AS(vh_expand(s, ActivationMask::filled(Region({5, 4}), true)), Error);
}
