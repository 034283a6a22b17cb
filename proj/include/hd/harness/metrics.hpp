#pragma once

#include "hd/curve/types.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace hd::harness {

/// Average Relative Improvement in percent:
/// (1/M) sum_i (vhd_i - bkd_i) / (bkd_i - stu_i) * 100, M = sequence length.
/// Throws degenerate_input when bkd_i == stu_i for some i.
double ari(std::span<const double> student, std::span<const double> baseline, std::span<const double> vhd);

struct BenchOptions {
    std::size_t runs = 5;
    std::size_t warmup = 1;
};

struct BenchRow {
    curve::CurveSpec spec;
    std::uint64_t points = 0;
    /// Median wall-clock of one full-region build, milliseconds.
    double median_ms = 0.0;
    std::vector<double> runs_ms;
};

/// Times build_mapping over each full hypercube on the calling thread.
std::vector<BenchRow> bench_curve(std::span<const curve::CurveSpec> specs, const BenchOptions& opts = {});

/// Specs of dimension n for the given power-of-two sides.
std::vector<curve::CurveSpec> specs_for_sides(int n, std::span<const std::uint32_t> sides);

nlohmann::json to_json(const std::vector<BenchRow>& rows);
std::string to_text(const std::vector<BenchRow>& rows);

} // namespace hd::harness
