#include "hd/curve/transform.hpp"

#include "hd/error.hpp"

namespace hd::curve {

namespace {

unsigned rotl(unsigned b, int k, int n) {
    const unsigned mask = (1u << n) - 1u;
    k %= n;
    return ((b << k) | (b >> (n - k))) & mask;
}

unsigned gray(unsigned w) { return w ^ (w >> 1); }

int trailing_ones(unsigned w) {
    int c = 0;
    while (w & 1u) {
        ++c;
        w >>= 1;
    }
    return c;
}

// Entry corner and exit-axis increment of the w-th child, in the child frame
// before the parent's transform is applied.
unsigned child_entry(unsigned w) { return w == 0 ? 0u : gray(2u * ((w - 1u) / 2u)); }

int child_axis(unsigned w, int n) {
    if (w == 0) {
        return 0;
    }
    return (w % 2 == 0 ? trailing_ones(w - 1u) : trailing_ones(w)) % n;
}

TransformTable make_table(int n) {
    TransformTable t;
    t.n = n;
    t.children = 1 << n;
    for (int e = 0; e < t.children; ++e) {
        for (int d = 0; d < n; ++d) {
            const auto s = static_cast<std::size_t>(TransformTable::state_id(e, d, n));
            for (unsigned w = 0; w < static_cast<unsigned>(t.children); ++w) {
                const unsigned c = rotl(gray(w), d + 1, n) ^ static_cast<unsigned>(e);
                const unsigned ce = static_cast<unsigned>(e) ^ rotl(child_entry(w), d + 1, n);
                const int cd = (d + child_axis(w, n) + 1) % n;
                t.corner[s][w] = static_cast<std::uint8_t>(c);
                t.next[s][w] = static_cast<std::uint8_t>(TransformTable::state_id(static_cast<int>(ce), cd, n));
                t.order[s][c] = static_cast<std::uint8_t>(w);
            }
        }
    }
    t.root_state = static_cast<std::uint8_t>(TransformTable::state_id(0, 1, n));
    return t;
}

} // namespace

const TransformTable& transform_table(int n) {
    static const TransformTable t2 = make_table(2);
    static const TransformTable t3 = make_table(3);
    require(n == 2 || n == 3, ErrorKind::unsupported_dimension, "transform tables exist for n = 2, 3");
    return n == 2 ? t2 : t3;
}

std::uint64_t transform_index(const CurveSpec& spec, const LatticePoint& cell) {
    spec.validate();
    for (int a = 0; a < 3; ++a) {
        const std::uint32_t limit = a < spec.n ? spec.side() : 1u;
        require(cell[static_cast<std::size_t>(a)] < limit, ErrorKind::out_of_bounds,
                "cell outside the curve's hypercube");
    }
    const auto& t = transform_table(spec.n);
    int state = t.root_state;
    std::uint64_t v = 0;
    for (int level = spec.p - 1; level >= 0; --level) {
        unsigned c = 0;
        for (int a = 0; a < spec.n; ++a) {
            c |= ((cell[static_cast<std::size_t>(a)] >> level) & 1u) << a;
        }
        const auto s = static_cast<std::size_t>(state);
        const unsigned w = t.order[s][c];
        v = (v << spec.n) | w;
        state = t.next[s][w];
    }
    return v;
}

LatticePoint transform_point(const CurveSpec& spec, std::uint64_t index) {
    spec.validate();
    require(index < spec.length(), ErrorKind::out_of_bounds, "curve index out of range");
    const auto& t = transform_table(spec.n);
    const unsigned mask = static_cast<unsigned>(t.children - 1);
    int state = t.root_state;
    LatticePoint pt;
    for (int level = spec.p - 1; level >= 0; --level) {
        const unsigned w = static_cast<unsigned>(index >> (level * spec.n)) & mask;
        const auto s = static_cast<std::size_t>(state);
        const unsigned c = t.corner[s][w];
        for (int a = 0; a < spec.n; ++a) {
            pt[static_cast<std::size_t>(a)] |= ((c >> a) & 1u) << level;
        }
        state = t.next[s][w];
    }
    return pt;
}

} // namespace hd::curve
