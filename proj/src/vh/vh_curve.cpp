#include "hd/vh/vh_curve.hpp"

#include "hd/curve/mapping_io.hpp"
#include "hd/curve/transform.hpp"
#include "hd/error.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <limits>

namespace hd::vh {

using curve::Heading;
using curve::Symbol;
using curve::Token;

namespace {

struct Pos {
    std::int64_t i = 0;
    std::int64_t j = 0;
};

Pos advance(Pos p, Heading h, std::int64_t m) {
    const auto s = curve::step_of(h);
    return {p.i + s[0] * m, p.j + s[1] * m};
}

/// Square of side s entered at p looking along h; A squares open to the
/// left of h, B squares to the right.
Box child_square(Pos p, Heading h, Symbol var, std::int64_t s) {
    const Heading side = var == Symbol::var_a ? curve::turn_left(h) : curve::turn_right(h);
    const Pos far = advance(advance(p, h, s - 1), side, s - 1);
    Box b;
    b.lo = {std::min(p.i, far.i), std::min(p.j, far.j), 0};
    b.hi = {std::max(p.i, far.i) + 1, std::max(p.j, far.j) + 1, 1};
    return b;
}

struct Expander {
    const ActivitySums& sums;
    std::vector<Token>& out;

    void expand(Symbol var, int level, Pos pos, Heading h) {
        if (level == 0) {
            return;
        }
        const auto rule = curve::production(var);
        const std::int64_t s = std::int64_t{1} << (level - 1);

        // Planning walk: entry pose of each child and its activity.
        struct Child {
            Pos pos;
            Heading h;
            bool live;
        };
        std::array<Child, 4> kids{};
        std::array<int, 4> forward_of{};
        std::array<std::int64_t, 3> extra{};
        int nk = 0, nf = 0;
        Pos p = pos;
        Heading hh = h;
        for (std::size_t t = 0; t < rule.size(); ++t) {
            switch (rule[t]) {
            case Symbol::turn_left:
                hh = curve::turn_left(hh);
                break;
            case Symbol::turn_right:
                hh = curve::turn_right(hh);
                break;
            case Symbol::forward:
                p = advance(p, hh, 1);
                ++nf;
                break;
            case Symbol::var_a:
            case Symbol::var_b: {
                kids[static_cast<std::size_t>(nk)] = {p, hh, sums.any(child_square(p, hh, rule[t], s))};
                // The Forward sharing this child's heading: the next symbol if
                // it is one, otherwise the previous.
                const bool next_fwd = t + 1 < rule.size() && rule[t + 1] == Symbol::forward;
                forward_of[static_cast<std::size_t>(nk)] = next_fwd ? nf : nf - 1;
                ++nk;
                p = advance(p, hh, s - 1);
                break;
            }
            }
        }
        for (int c = 0; c < 4; ++c) {
            if (!kids[static_cast<std::size_t>(c)].live) {
                extra[static_cast<std::size_t>(forward_of[static_cast<std::size_t>(c)])] += s - 1;
            }
        }

        int ck = 0, cf = 0;
        for (Symbol sym : rule) {
            switch (sym) {
            case Symbol::turn_left:
                out.push_back(Token::left());
                break;
            case Symbol::turn_right:
                out.push_back(Token::right());
                break;
            case Symbol::forward:
                out.push_back(Token::forward(static_cast<std::uint32_t>(1 + extra[static_cast<std::size_t>(cf++)])));
                break;
            case Symbol::var_a:
            case Symbol::var_b: {
                const auto& k = kids[static_cast<std::size_t>(ck++)];
                if (k.live) {
                    expand(sym, level - 1, k.pos, k.h);
                }
                break;
            }
            }
        }
    }
};

struct Descender {
    const curve::TransformTable& t;
    const ActivitySums& sums;
    int n;
    std::vector<LatticePoint>& out;

    static LatticePoint offset(const LatticePoint& o, unsigned corner, std::uint32_t s) {
        LatticePoint c = o;
        for (std::size_t a = 0; a < 3; ++a) {
            c[a] += ((corner >> a) & 1u) * s;
        }
        return c;
    }

    void line(int state, const LatticePoint& o, std::uint32_t s) {
        const unsigned e = static_cast<unsigned>(t.entry_of(state));
        const auto d = static_cast<std::size_t>(t.axis_of(state));
        LatticePoint c = offset(o, e, s - 1);
        const bool down = ((e >> d) & 1u) != 0;
        for (std::uint32_t m = 0; m < s; ++m) {
            out.push_back(c);
            if (m + 1 < s) {
                c[d] = down ? c[d] - 1 : c[d] + 1;
            }
        }
    }

    void descend(int state, int level, const LatticePoint& o) {
        if (level == 0) {
            out.push_back(o);
            return;
        }
        const std::uint32_t s = std::uint32_t{1} << (level - 1);
        for (int w = 0; w < t.children; ++w) {
            const unsigned corner = t.corner[static_cast<std::size_t>(state)][static_cast<std::size_t>(w)];
            const int child = t.next[static_cast<std::size_t>(state)][static_cast<std::size_t>(w)];
            const auto co = offset(o, corner, s);
            if (s == 1 || sums.any(Box::cube(co, s, n))) {
                descend(child, level - 1, co);
            } else {
                line(child, co, s);
            }
        }
    }
};

void check_mask(const CurveSpec& spec, const ActivationMask& mask) {
    spec.validate();
    require(mask.region().dims() == spec.n, ErrorKind::shape_mismatch, "mask rank does not match n");
    mask.region().check_fits(spec);
}

} // namespace

WalkGuide vh_expand(const CurveSpec& spec, const ActivationMask& mask) {
    check_mask(spec, mask);
    require(spec.n == 2, ErrorKind::unsupported_dimension, "guide expansion is 2D; use vh_walk for n = 3");
    const ActivitySums sums(mask);
    WalkGuide g;
    Expander ex{sums, g.tokens};
    ex.expand(Symbol::var_a, spec.p, Pos{}, Heading::right);
    curve::cancel_turns(g.tokens);
    return g;
}

std::vector<LatticePoint> vh_walk(const CurveSpec& spec, const ActivationMask& mask) {
    check_mask(spec, mask);
    const ActivitySums sums(mask);
    const auto& t = curve::transform_table(spec.n);
    std::vector<LatticePoint> cells;
    Descender d{t, sums, spec.n, cells};
    d.descend(t.root_state, spec.p, LatticePoint{});
    return cells;
}

std::uint32_t nearest_on_curve(const Region& region, std::span<const std::uint32_t> on_curve,
                               const LatticePoint& cell) {
    const int dims = region.dims();
    std::array<std::int64_t, 3> ext{1, 1, 1};
    for (int a = 0; a < dims; ++a) {
        ext[static_cast<std::size_t>(a)] = region.extent(a);
    }
    std::int64_t best_d2 = std::numeric_limits<std::int64_t>::max();
    std::uint32_t best = MappingTable::kNone;
    auto consider = [&](std::int64_t di, std::int64_t dj, std::int64_t dk) {
        const std::int64_t i = cell[0] + di, j = cell[1] + dj, k = cell[2] + dk;
        if (i < 0 || j < 0 || k < 0 || i >= ext[0] || j >= ext[1] || k >= ext[2]) {
            return;
        }
        const auto v = on_curve[static_cast<std::size_t>((i * ext[1] + j) * ext[2] + k)];
        if (v == MappingTable::kNone) {
            return;
        }
        const std::int64_t d2 = di * di + dj * dj + dk * dk;
        if (d2 < best_d2 || (d2 == best_d2 && v < best)) {
            best_d2 = d2;
            best = v;
        }
    };
    const std::int64_t rmax = std::max({ext[0], ext[1], ext[2]});
    for (std::int64_t r = 0; r <= rmax; ++r) {
        // Every cell on Chebyshev ring r is at least r away.
        if (best != MappingTable::kNone && r * r > best_d2) {
            break;
        }
        const std::int64_t rk = dims == 3 ? r : 0;
        for (std::int64_t dk = -rk; dk <= rk; ++dk) {
            for (std::int64_t di = -r; di <= r; ++di) {
                if (std::abs(di) == r || std::abs(dk) == r) {
                    for (std::int64_t dj = -r; dj <= r; ++dj) {
                        consider(di, dj, dk);
                    }
                } else {
                    consider(di, -r, dk);
                    if (r != 0) {
                        consider(di, r, dk);
                    }
                }
            }
        }
    }
    require(best != MappingTable::kNone, ErrorKind::degenerate_input, "no on-curve cell in region");
    return best;
}

VhMappingTable vh_mapping(const CurveSpec& spec, const Region& region, const ActivationMask& mask) {
    require(mask.region() == region, ErrorKind::shape_mismatch,
            "mask extents " + mask.region().to_string() + " do not match region " + region.to_string());
    const auto walk = vh_walk(spec, mask);

    std::vector<std::pair<LatticePoint, std::uint32_t>> entries;
    std::vector<std::uint32_t> index_of(region.cell_count(), MappingTable::kNone);
    for (const auto& c : walk) {
        if (!region.contains(c)) {
            continue;
        }
        auto& slot = index_of[region.linear(c)];
        require(slot == MappingTable::kNone, ErrorKind::invalid_argument, "variable-length walk revisits a cell");
        slot = static_cast<std::uint32_t>(entries.size());
        entries.emplace_back(c, slot);
    }

    VhMappingTable out;
    out.base = curve::assemble_mapping(spec, region, curve::Layout::compacted, entries.size(), entries);
    for (std::uint64_t lin = 0; lin < region.cell_count(); ++lin) {
        if (index_of[lin] != MappingTable::kNone) {
            continue;
        }
        const auto cell = region.point(lin);
        out.representatives.push_back({cell, nearest_on_curve(region, index_of, cell)});
    }
    return out;
}

std::uint32_t VhMappingTable::source_index(const LatticePoint& cell) const {
    if (const auto v = base.index_of(cell)) {
        return *v;
    }
    const auto it = std::lower_bound(representatives.begin(), representatives.end(), cell,
                                     [this](const Representative& r, const LatticePoint& c) {
                                         return base.region().linear(r.cell) < base.region().linear(c);
                                     });
    require(it != representatives.end() && it->cell == cell, ErrorKind::out_of_bounds, "cell outside region");
    return it->index;
}

} // namespace hd::vh
