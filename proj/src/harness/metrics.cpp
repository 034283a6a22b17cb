#include "hd/harness/metrics.hpp"

#include "hd/curve/mapping.hpp"
#include "hd/error.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <iomanip>
#include <sstream>

namespace hd::harness {

double ari(std::span<const double> student, std::span<const double> baseline, std::span<const double> vhd) {
    require(!student.empty() && student.size() == baseline.size() && student.size() == vhd.size(),
            ErrorKind::invalid_argument, "ari needs three equal-length, non-empty accuracy sequences");
    double total = 0;
    for (std::size_t i = 0; i < student.size(); ++i) {
        const double gain = baseline[i] - student[i];
        require(gain != 0.0, ErrorKind::degenerate_input,
                "ari: baseline equals student at position " + std::to_string(i));
        total += (vhd[i] - baseline[i]) / gain;
    }
    return 100.0 * total / static_cast<double>(student.size());
}

std::vector<BenchRow> bench_curve(std::span<const curve::CurveSpec> specs, const BenchOptions& opts) {
    require(opts.runs >= 1, ErrorKind::invalid_argument, "bench needs at least one timed run");
    std::vector<BenchRow> rows;
    for (const auto& spec : specs) {
        spec.validate();
        const curve::Region region = curve::Region::full(spec);
        BenchRow row;
        row.spec = spec;
        row.points = region.cell_count();
        for (std::size_t w = 0; w < opts.warmup; ++w) {
            (void)curve::build_mapping(spec, region, curve::Layout::padded);
        }
        for (std::size_t r = 0; r < opts.runs; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto table = curve::build_mapping(spec, region, curve::Layout::padded);
            const auto t1 = std::chrono::steady_clock::now();
            require(table.entry_count() == row.points, ErrorKind::invalid_argument, "incomplete mapping");
            row.runs_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        auto sorted = row.runs_ms;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t m = sorted.size();
        row.median_ms = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<curve::CurveSpec> specs_for_sides(int n, std::span<const std::uint32_t> sides) {
    std::vector<curve::CurveSpec> out;
    for (auto s : sides) {
        require(s >= 2 && std::has_single_bit(s), ErrorKind::invalid_argument,
                "side " + std::to_string(s) + " is not a power of two >= 2");
        curve::CurveSpec spec{n, std::countr_zero(s)};
        spec.validate();
        out.push_back(spec);
    }
    return out;
}

nlohmann::json to_json(const std::vector<BenchRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        out.push_back({{"n", r.spec.n},
                       {"p", r.spec.p},
                       {"side", r.spec.side()},
                       {"points", r.points},
                       {"median_ms", r.median_ms},
                       {"runs_ms", r.runs_ms}});
    }
    return out;
}

std::string to_text(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << std::setw(3) << "n" << std::setw(8) << "side" << std::setw(14) << "points" << std::setw(14) << "median_ms"
       << '\n';
    for (const auto& r : rows) {
        os << std::setw(3) << r.spec.n << std::setw(8) << r.spec.side() << std::setw(14) << r.points << std::fixed
           << std::setprecision(3) << std::setw(14) << r.median_ms << '\n';
        os.unsetf(std::ios::fixed);
    }
    return os.str();
}

} // namespace hd::harness
