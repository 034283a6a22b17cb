#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hd::harness {

struct GradCheckOptions {
    double eps = 1e-4;
    /// Relative errors are taken against max(|analytic|, |numeric|, floor).
    double floor = 1e-3;
    /// A coordinate whose one-sided slopes differ by more than
    /// kink_tol * max(1, |slope|) sits on a kink and is skipped.
    double kink_tol = 1e-2;
    /// Optional caller-side test for known non-differentiable coordinates.
    std::function<bool(std::size_t)> skip;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
    std::size_t worst_index = 0;
};

/// Central finite differences of a scalar function against an analytic
/// gradient, coordinate by coordinate. Throws non_finite if any evaluation
/// is not finite.
GradCheckResult grad_check(const std::function<double(std::span<const double>)>& fn, std::span<const double> x,
                           std::span<const double> analytic, const GradCheckOptions& opts = {});

} // namespace hd::harness
