#include "hd/harness/grad_check.hpp"

#include "hd/error.hpp"

#include <algorithm>
#include <cmath>

namespace hd::harness {

GradCheckResult grad_check(const std::function<double(std::span<const double>)>& fn, std::span<const double> x,
                           std::span<const double> analytic, const GradCheckOptions& opts) {
    require(x.size() == analytic.size(), ErrorKind::shape_mismatch, "gradient and input sizes differ");
    std::vector<double> probe(x.begin(), x.end());
    auto eval = [&] {
        const double v = fn(probe);
        require(std::isfinite(v), ErrorKind::non_finite, "function evaluation is not finite");
        return v;
    };
    const double f0 = eval();
    GradCheckResult r;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (opts.skip && opts.skip(k)) {
            ++r.skipped;
            continue;
        }
        const double h = opts.eps;
        probe[k] = x[k] + h;
        const double fp = eval();
        probe[k] = x[k] - h;
        const double fm = eval();
        probe[k] = x[k];
        const double fwd = (fp - f0) / h;
        const double bwd = (f0 - fm) / h;
        if (std::abs(fwd - bwd) > opts.kink_tol * std::max({1.0, std::abs(fwd), std::abs(bwd)})) {
            ++r.skipped;
            continue;
        }
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), opts.floor});
        const double rel = std::abs(analytic[k] - numeric) / denom;
        if (rel > r.max_rel_error) {
            r.max_rel_error = rel;
            r.worst_index = k;
        }
        ++r.checked;
    }
    return r;
}

} // namespace hd::harness
