#pragma once

#include "hd/curve/types.hpp"

#include <array>
#include <cstdint>

namespace hd::curve {

/// Per-level coordinate transform of the Hilbert curve.
///
/// A sub-cube's orientation is a state (entry corner e, exit axis d): the curve
/// enters the sub-cube at corner e and leaves it at corner e ^ (1 << d). At each
/// level the 2^n children are visited in reflected-Gray-code order rotated by
/// d + 1 and reflected by e. Corner bit a holds the coordinate along axis a
/// (a = 0 is i, 1 is j, 2 is k).
///
/// The root state (e = 0, d = 1) starts at the origin and exits along j, which
/// matches the L-system walk that starts at (0,0) looking right.
struct TransformTable {
    static constexpr int kMaxStates = 24;
    static constexpr int kMaxChildren = 8;

    int n = 2;
    int children = 4;
    std::uint8_t root_state = 0;
    /// corner[s][w]: corner bits of the w-th visited child of a cube in state s.
    std::array<std::array<std::uint8_t, kMaxChildren>, kMaxStates> corner{};
    /// next[s][w]: state of that child.
    std::array<std::array<std::uint8_t, kMaxChildren>, kMaxStates> next{};
    /// order[s][c]: visit position of the child at corner c.
    std::array<std::array<std::uint8_t, kMaxChildren>, kMaxStates> order{};

    static int state_id(int entry, int axis, int n) { return entry * n + axis; }
    int entry_of(int state) const { return state / n; }
    int axis_of(int state) const { return state % n; }
};

const TransformTable& transform_table(int n);

/// Hilbert index of a cell of the full 2^p hypercube.
std::uint64_t transform_index(const CurveSpec& spec, const LatticePoint& cell);

/// Inverse of transform_index.
LatticePoint transform_point(const CurveSpec& spec, std::uint64_t index);

namespace detail {

template <class Emit>
void traverse_level(const TransformTable& t, int state, int level, std::uint32_t i, std::uint32_t j,
                    std::uint32_t k, Emit& emit) {
    const auto& corner = t.corner[static_cast<std::size_t>(state)];
    if (level == 1) {
        for (int w = 0; w < t.children; ++w) {
            const unsigned c = corner[static_cast<std::size_t>(w)];
            emit(i + (c & 1u), j + ((c >> 1) & 1u), k + ((c >> 2) & 1u));
        }
        return;
    }
    const std::uint32_t half = std::uint32_t{1} << (level - 1);
    const auto& next = t.next[static_cast<std::size_t>(state)];
    for (int w = 0; w < t.children; ++w) {
        const unsigned c = corner[static_cast<std::size_t>(w)];
        traverse_level(t, next[static_cast<std::size_t>(w)], level - 1, i + (c & 1u) * half,
                       j + ((c >> 1) & 1u) * half, k + ((c >> 2) & 1u) * half, emit);
    }
}

} // namespace detail

/// Calls emit(i, j, k) for every cell of the hypercube in curve order
/// (k is always 0 for n = 2).
template <class Emit>
void traverse_curve(const CurveSpec& spec, Emit&& emit) {
    spec.validate();
    const auto& t = transform_table(spec.n);
    detail::traverse_level(t, t.root_state, spec.p, 0, 0, 0, emit);
}

} // namespace hd::curve
