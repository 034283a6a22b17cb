#include "hd/harness/data.hpp"

#include "hd/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace hd::harness {

void SynthConfig::validate() const {
    require(samples >= 2 * kBarClasses, ErrorKind::config, "samples: need at least two per class");
    require(side >= 8 && side <= 64, ErrorKind::config, "side: must lie in [8, 64]");
    require(std::isfinite(amplitude) && amplitude > 0, ErrorKind::config, "amplitude: must be positive");
    require(std::isfinite(noise) && noise >= 0, ErrorKind::config, "noise: must be non-negative");
    require(thickness >= 1 && thickness <= 4, ErrorKind::config, "thickness: must lie in [1, 4]");
    require(2 * jitter + thickness < side, ErrorKind::config, "jitter: bar would leave the volume");
    require(depth_extent >= 1 && depth_extent <= side, ErrorKind::config, "depth_extent: must lie in [1, side]");
    require(test_fraction > 0 && test_fraction < 1, ErrorKind::config, "test_fraction: must lie in (0, 1)");
}

namespace {

/// In-plane cells of a class pattern anchored at (i0, j0).
std::vector<std::pair<std::size_t, std::size_t>> pattern(BarClass cls, std::size_t s, std::size_t i0, std::size_t j0,
                                                         std::size_t thick) {
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t a = 0; a < thick; ++a) {
        switch (cls) {
        case BarClass::along_j:
            for (std::size_t t = 0; t < s; ++t) {
                cells.emplace_back(i0 + a, t);
            }
            break;
        case BarClass::along_i:
            for (std::size_t t = 0; t < s; ++t) {
                cells.emplace_back(t, j0 + a);
            }
            break;
        case BarClass::diagonal:
            // Wraps so every row carries `thick` cells.
            for (std::size_t t = 0; t < s; ++t) {
                cells.emplace_back(t, (t + j0 + s - i0 + a) % s);
            }
            break;
        case BarClass::along_k:
            for (std::size_t b = 0; b < thick; ++b) {
                cells.emplace_back(i0 + a, j0 + b);
            }
            break;
        }
    }
    return cells;
}

} // namespace

SynthDataset make_synthetic(const SynthConfig& config, std::uint64_t seed) {
    config.validate();
    const std::size_t s = config.side, n = config.samples;
    std::mt19937_64 rng(seed);
    std::vector<int> labels(n);
    for (std::size_t k = 0; k < n; ++k) {
        labels[k] = static_cast<int>(k % kBarClasses);
    }
    std::shuffle(labels.begin(), labels.end(), rng);

    SynthDataset d;
    d.seed = seed;
    d.volumes = Tensor({n, 1, s, s, s});
    d.slices = Tensor({n, 1, s, s});
    d.labels = labels;
    std::uniform_int_distribution<long> jit(-static_cast<long>(config.jitter), static_cast<long>(config.jitter));
    std::normal_distribution<double> noise(0.0, config.noise);
    std::seed_seq slice_seed{seed, std::uint64_t{7}};
    std::mt19937_64 slice_rng(slice_seed);
    const std::size_t mid = s / 2;
    // Depth window [k_lo, k_lo + extent) containing mid.
    const std::size_t k_min = mid + 1 >= config.depth_extent ? mid + 1 - config.depth_extent : 0;
    const std::size_t k_max = std::min<std::size_t>(mid, s - config.depth_extent);
    std::uniform_int_distribution<std::size_t> window(k_min, k_max);
    const std::size_t anchor = mid - config.thickness / 2;
    for (std::size_t k = 0; k < n; ++k) {
        Tensor vol({s * s * s});
        const std::size_t i0 = static_cast<std::size_t>(static_cast<long>(anchor) + jit(rng));
        const std::size_t j0 = static_cast<std::size_t>(static_cast<long>(anchor) + jit(rng));
        const std::size_t k_lo = window(rng);
        for (const auto& [i, j] : pattern(static_cast<BarClass>(labels[k]), s, i0, j0, config.thickness)) {
            for (std::size_t z = k_lo; z < k_lo + config.depth_extent; ++z) {
                vol[(z * s + i) * s + j] = config.amplitude;
            }
        }
        for (std::uint32_t b = 0; b < config.clutter; ++b) {
            const std::size_t t = config.thickness;
            std::uniform_int_distribution<std::size_t> pos(0, s - t);
            std::size_t kb = pos(rng);
            while (kb + t + 1 > mid && kb < mid + 2) {
                kb = pos(rng);
            }
            const std::size_t ib = pos(rng), jb = pos(rng);
            for (std::size_t z = kb; z < kb + t; ++z) {
                for (std::size_t i = ib; i < ib + t; ++i) {
                    for (std::size_t j = jb; j < jb + t; ++j) {
                        vol[(z * s + i) * s + j] = config.amplitude;
                    }
                }
            }
        }
        if (config.noise > 0) {
            for (auto& v : vol.values()) {
                v += noise(rng);
            }
        }
        std::copy(vol.values().begin(), vol.values().end(), d.volumes.data() + k * s * s * s);
        std::size_t shown = mid;
        if (config.random_slice) {
            shown = std::uniform_int_distribution<std::size_t>(k_lo, k_lo + config.depth_extent - 1)(slice_rng);
        }
        std::copy_n(vol.data() + shown * s * s, s * s, d.slices.data() + k * s * s);
    }

    // Stratified split: the first test_fraction of each class goes to test.
    std::vector<std::size_t> seen(kBarClasses, 0), counts(kBarClasses, 0);
    for (int l : labels) {
        ++counts[static_cast<std::size_t>(l)];
    }
    for (std::size_t k = 0; k < n; ++k) {
        const auto c = static_cast<std::size_t>(labels[k]);
        const auto quota = static_cast<std::size_t>(std::lround(config.test_fraction * static_cast<double>(counts[c])));
        (seen[c]++ < quota ? d.test : d.train).push_back(k);
    }
    return d;
}

int classify_by_rule(const Tensor& volume, const SynthConfig& config) {
    require(volume.rank() == 3 && volume.dim(0) == volume.dim(1) && volume.dim(1) == volume.dim(2),
            ErrorKind::shape_mismatch, "classify_by_rule expects a cubic [S, S, S] volume");
    const std::size_t s = volume.dim(0), thick = config.thickness;
    std::vector<double> proj(s * s, 0.0);
    for (std::size_t k = 0; k < s; ++k) {
        for (std::size_t c = 0; c < s * s; ++c) {
            proj[c] += volume[k * s * s + c];
        }
    }
    const auto p = [&](std::size_t i, std::size_t j) { return proj[(i % s) * s + (j % s)]; };
    // Mean projected intensity along the best thick line of each orientation.
    std::array<double, 3> best;
    best.fill(-1e300);
    for (std::size_t a = 0; a < s; ++a) {
        double row = 0, col = 0, diag = 0;
        for (std::size_t b = 0; b < thick; ++b) {
            for (std::size_t t = 0; t < s; ++t) {
                row += p(a + b, t);
                col += p(t, a + b);
                diag += p(t, t + a + b);
            }
        }
        const double cells = static_cast<double>(s * thick);
        best[0] = std::max(best[0], row / cells);
        best[1] = std::max(best[1], col / cells);
        best[2] = std::max(best[2], diag / cells);
    }
    static constexpr BarClass kLine[] = {BarClass::along_j, BarClass::along_i, BarClass::diagonal};
    const auto top = static_cast<std::size_t>(std::max_element(best.begin(), best.end()) - best.begin());
    const double strength = config.amplitude * static_cast<double>(config.depth_extent);
    return best[top] > 0.5 * strength ? static_cast<int>(kLine[top]) : static_cast<int>(BarClass::along_k);
}

Tensor gather_rows(const Tensor& batch, std::span<const std::size_t> index) {
    require(batch.rank() >= 1, ErrorKind::shape_mismatch, "gather_rows needs a batch axis");
    const std::size_t row = batch.size() / batch.dim(0);
    Shape shape = batch.shape();
    shape[0] = index.size();
    Tensor out(shape);
    for (std::size_t r = 0; r < index.size(); ++r) {
        require(index[r] < batch.dim(0), ErrorKind::out_of_bounds, "row index out of range");
        std::copy_n(batch.data() + index[r] * row, row, out.data() + r * row);
    }
    return out;
}

} // namespace hd::harness
