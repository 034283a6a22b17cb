#pragma once

#include "hd/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hd::harness {

/// Bar classes by in-plane orientation. Volumes are indexed [k, i, j] with
/// k the depth axis; each class paints its in-plane pattern on a window of
/// consecutive k slices, so along_k is a rod seen end-on in every slice. The
/// student sees the middle k slice.
enum class BarClass : int {
    along_j = 0,
    along_i = 1,
    along_k = 2,
    diagonal = 3,
};

inline constexpr std::size_t kBarClasses = 4;

struct SynthConfig {
    std::size_t samples = 1000;
    std::uint32_t side = 16;
    /// Peak bar intensity.
    double amplitude = 1.0;
    /// Bar cross-section, in voxels per side.
    std::uint32_t thickness = 2;
    /// Standard deviation of additive Gaussian noise.
    double noise = 0.6;
    /// Largest offset of the bar from the volume centre, per axis.
    std::uint32_t jitter = 3;
    /// Number of k slices the pattern occupies; always includes the middle slice.
    std::uint32_t depth_extent = 16;
    /// Class-independent bright cubes per volume, kept at least two slices
    /// away from the middle one so only the volume shows them.
    std::uint32_t clutter = 4;
    /// Fraction of samples held out for testing.
    double test_fraction = 0.9;
    /// Student slice drawn uniformly from the pattern's depth window instead
    /// of the middle one. Pair with an align layer.
    bool random_slice = false;

    void validate() const;
};

struct SynthDataset {
    /// [N, 1, S, S, S]
    Tensor volumes;
    /// [N, 1, S, S], one depth slice of each volume (the middle one unless
    /// random_slice).
    Tensor slices;
    std::vector<int> labels;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;

    std::size_t size() const { return labels.size(); }
    std::uint32_t side() const { return static_cast<std::uint32_t>(slices.dim(2)); }
};

/// Deterministic in (config, seed). Labels cycle through the classes before
/// shuffling, so class counts differ by at most one.
SynthDataset make_synthetic(const SynthConfig& config, std::uint64_t seed);

/// Rule-based label from the depth projection of a [S, S, S] volume: the
/// brightest thick line among the three line orientations if its mean clears
/// half the painted line strength, along_k otherwise.
int classify_by_rule(const Tensor& volume, const SynthConfig& config);

/// Rows `index` of a batch-major tensor.
Tensor gather_rows(const Tensor& batch, std::span<const std::size_t> index);

} // namespace hd::harness
