#include "criteria.hpp"

#include "hd/curve/guide.hpp"
#include "hd/curve/mapping.hpp"
#include "hd/curve/mapping_io.hpp"
#include "hd/harness/metrics.hpp"
#include "hd/io/tensor_file.hpp"
#include "hd/vh/vh_curve.hpp"
#include "hd/vh/vh_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace acceptance {

using namespace hd;
using curve::CurveSpec;
using curve::Region;

namespace {

constexpr const char* kGuideP1 = "⊕▷⊖▷⊖▷⊕";
constexpr const char* kGuideP2 = "▷⊕▷⊕▷⊖▷▷⊖▷⊖▷⊕▷⊕▷⊖▷⊖▷▷⊖▷⊕▷⊕▷";
constexpr const char* kVhGuideP2 = "⊕▷▷▷⊖▷⊖▷⊕▷⊕▷⊖▷⊖▷▷▷⊕";

std::uint32_t l1(const curve::LatticePoint& a, const curve::LatticePoint& b) {
    std::uint32_t d = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        d += a[k] > b[k] ? a[k] - b[k] : b[k] - a[k];
    }
    return d;
}

std::string ok_or(bool ok, const std::string& fail_text, const std::string& pass_text) {
    return ok ? pass_text : fail_text;
}

} // namespace

Outcome guide_fidelity() {
    const auto p1 = curve::render_guide(curve::expand_guides({2, 1}));
    const auto p2 = curve::render_guide(curve::expand_guides({2, 2}));
    const bool ok = p1 == kGuideP1 && p2 == kGuideP2;
    return {ok, ok_or(ok, "got p=1 " + p1 + ", p=2 " + p2, "p=1 and p=2 guides match exactly")};
}

Outcome vh_guide_fidelity() {
    auto mask = vh::ActivationMask::filled(Region({4, 4}), false);
    for (std::uint32_t i = 2; i < 4; ++i) {
        for (std::uint32_t j = 0; j < 4; ++j) {
            mask.set({{i, j, 0}}, true);
        }
    }
    const auto g = curve::render_guide(vh::vh_expand({2, 2}, mask));
    const bool ok = g == kVhGuideP2;
    return {ok, ok_or(ok, "got " + g, "two-quadrant guide matches exactly")};
}

Outcome bijectivity_locality() {
    std::size_t specs = 0, pairs = 0, bad = 0;
    std::string first_bad;
    const auto check = [&](const CurveSpec& s) {
        const auto table = curve::build_mapping(s, Region::full(s));
        const auto i2c = table.index_to_cell();
        std::vector<std::uint8_t> seen(table.region().cell_count(), 0);
        bool ok = i2c.size() == s.length();
        for (std::size_t v = 0; ok && v < i2c.size(); ++v) {
            ok = i2c[v] != curve::MappingTable::kNone && !seen[i2c[v]] &&
                 table.index_of(table.region().point(i2c[v])) == v;
            if (ok) {
                seen[i2c[v]] = 1;
            }
        }
        for (std::size_t v = 1; ok && v < i2c.size(); ++v) {
            ++pairs;
            ok = l1(table.region().point(i2c[v - 1]), table.region().point(i2c[v])) == 1;
        }
        if (ok && s.n == 2) {
            const auto walk = curve::walk_guide(curve::expand_guides(s), s.side());
            ok = walk.size() == i2c.size();
            for (std::size_t v = 0; ok && v < walk.size(); ++v) {
                ok = walk[v] == table.region().point(i2c[v]);
            }
        }
        ++specs;
        if (!ok) {
            ++bad;
            if (first_bad.empty()) {
                first_bad = "n=" + std::to_string(s.n) + " p=" + std::to_string(s.p);
            }
        }
    };
    for (int p = 1; p <= 6; ++p) {
        check({2, p});
    }
    for (int p = 1; p <= 4; ++p) {
        check({3, p});
    }
    const bool ok = bad == 0;
    return {ok, ok_or(ok, std::to_string(bad) + " failing specs, first " + first_bad,
                      std::to_string(specs) + " specs bijective, " + std::to_string(pairs) +
                          " consecutive pairs at distance 1, 2D transform equals walk")};
}

Outcome ari_reproduction() {
    const double stu[] = {61.42, 60.22};
    const double vhd[] = {63.71, 64.02};
    struct Row {
        const char* name;
        double a, b, printed;
    };
    const Row rows[] = {{"KD", 62.30, 61.45, 184.59}, {"SP", 62.88, 62.27, 71.11},
                        {"PKT", 62.73, 62.70, 64.02}, {"RKD", 62.14, 61.23, 247.15},
                        {"CCKD", 62.78, 61.88, 98.65}, {"HD", 63.55, 63.46, 12.40}};
    constexpr double kTolerance = 0.25;
    double worst = 0;
    std::ostringstream os;
    os.precision(5);
    for (const auto& r : rows) {
        const double bkd[] = {r.a, r.b};
        const double got = harness::ari(stu, bkd, vhd);
        worst = std::max(worst, std::abs(got - r.printed));
        os << r.name << " " << got << ", ";
    }
    const bool ok = worst <= kTolerance;
    os << "worst deviation " << worst;
    return {ok, os.str()};
}

Outcome benchmark_scaling() {
    const std::uint32_t sides[] = {2, 4, 8, 16, 32, 64, 128, 256};
    constexpr double kPublishedMs = 10.043;
    constexpr double kBand = 10.0;
    const auto specs = harness::specs_for_sides(3, sides);
    const auto rows = harness::bench_curve(specs, {.runs = 5, .warmup = 1});
    bool monotone = true;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        monotone = monotone && rows[r].median_ms >= rows[r - 1].median_ms;
    }
    const double last = rows.back().median_ms;
    const bool in_band = last <= kPublishedMs * kBand && last >= kPublishedMs / kBand;
    std::ostringstream os;
    os.precision(4);
    os << rows.size() << " rows, medians";
    for (const auto& r : rows) {
        os << " " << r.median_ms;
    }
    os << " ms; " << (monotone ? "monotone" : "NOT monotone") << "; side 256 " << last << " ms "
       << (in_band ? "within" : "outside") << " 10x of " << kPublishedMs;
    return {rows.size() == 8 && monotone && in_band, os.str()};
}

Outcome vh_amplification() {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> frac(0.05, 0.5);
    std::size_t masks = 0, failures = 0;
    double min_gain = 1e300;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 2;
        const int p = 2 + (trial / 2) % 3;
        const CurveSpec s{n, p};
        const Region r = Region::full(s);
        const std::uint64_t cells = r.cell_count();
        auto active = static_cast<std::uint64_t>(std::llround(frac(rng) * static_cast<double>(cells)));
        active = std::clamp<std::uint64_t>(active, 1, cells / 2);
        std::vector<std::uint64_t> ids(cells);
        std::iota(ids.begin(), ids.end(), 0);
        std::shuffle(ids.begin(), ids.end(), rng);
        auto mask = vh::ActivationMask::filled(r, false);
        for (std::uint64_t k = 0; k < active; ++k) {
            mask.set(r.point(ids[k]), true);
        }
        const auto table = vh::vh_mapping(s, r, mask);
        std::uint64_t active_on = 0;
        bool ok = true;
        for (std::uint64_t lin = 0; lin < cells; ++lin) {
            const auto c = r.point(lin);
            if (mask.active(c)) {
                ok = ok && table.on_curve(c);
                active_on += table.on_curve(c) ? 1 : 0;
            }
        }
        const double on_frac = static_cast<double>(active_on) / static_cast<double>(table.on_curve_count());
        ok = ok && on_frac >= mask.active_fraction();
        min_gain = std::min(min_gain, on_frac / mask.active_fraction());
        ++masks;
        failures += ok ? 0 : 1;
    }
    std::ostringstream os;
    os.precision(4);
    os << masks << " masks, " << failures << " failures, smallest on-curve/region active ratio " << min_gain;
    return {failures == 0, os.str()};
}

Outcome format_round_trips() {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> normal(0.0, 3.0);
    std::size_t tensor_bad = 0, table_bad = 0, vh_bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        // TensorFile, both dtypes.
        const std::size_t rank = 1 + static_cast<std::size_t>(trial % 4);
        Shape shape;
        for (std::size_t a = 0; a < rank; ++a) {
            shape.push_back(1 + rng() % 5);
        }
        Tensor t64(shape), t32(shape);
        for (std::size_t k = 0; k < t64.size(); ++k) {
            t64[k] = normal(rng);
            t32[k] = static_cast<double>(static_cast<float>(normal(rng)));
        }
        for (const auto& [t, dtype] : {std::pair{t64, io::DType::float64}, std::pair{t32, io::DType::float32}}) {
            std::stringstream ss;
            io::write_tensor(ss, t, dtype);
            const auto back = io::read_tensor(ss);
            tensor_bad += back.tensor == t && back.dtype == dtype ? 0 : 1;
        }

        // Mapping tables, binary and JSON.
        const CurveSpec s{2 + trial % 2, 1 + static_cast<int>(rng() % (trial % 2 ? 3 : 4))};
        std::vector<std::uint32_t> ext;
        for (int a = 0; a < s.n; ++a) {
            ext.push_back(1 + static_cast<std::uint32_t>(rng() % s.side()));
        }
        const Region r(ext);
        const auto layout = rng() % 2 ? curve::Layout::padded : curve::Layout::compacted;
        const auto table = curve::build_mapping(s, r, layout);
        std::stringstream bin;
        curve::write_mapping_binary(bin, table);
        const auto from_bin = curve::read_mapping_binary(bin);
        const auto from_json = curve::mapping_from_json(nlohmann::json::parse(curve::mapping_to_json(table).dump()));
        table_bad += from_bin == table && from_json == table ? 0 : 1;

        // Variable-length tables.
        std::bernoulli_distribution on(0.3);
        auto mask = vh::ActivationMask::filled(r, false);
        for (std::uint64_t lin = 0; lin < r.cell_count(); ++lin) {
            mask.set(r.point(lin), on(rng));
        }
        const auto vt = vh::vh_mapping(s, r, mask);
        std::stringstream vbin;
        vh::write_vh_binary(vbin, vt);
        const auto v_bin = vh::read_vh_binary(vbin);
        const auto v_json = vh::vh_from_json(nlohmann::json::parse(vh::vh_to_json(vt).dump()));
        vh_bad += v_bin == vt && v_json == vt ? 0 : 1;
    }
    const bool ok = tensor_bad + table_bad + vh_bad == 0;
    return {ok, "100 instances each; mismatches: tensor " + std::to_string(tensor_bad) + ", HDMT/JSON " +
                    std::to_string(table_bad) + ", VH " + std::to_string(vh_bad)};
}

} // namespace acceptance
