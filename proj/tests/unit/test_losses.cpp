#include "hd/curve/mapping.hpp"
#include "hd/error.hpp"
#include "hd/harness/grad_check.hpp"
#include "hd/losses/code.hpp"
#include "hd/losses/loss.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hd;
using namespace hd::losses;
using curve::build_mapping;
using curve::CurveSpec;
using curve::Layout;
using curve::Region;
using harness::grad_check;

namespace {

std::vector<double> randn(std::size_t n, std::mt19937& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = d(rng);
    }
    return v;
}

Tensor rand_tensor(Shape s, std::mt19937& rng) {
    const auto n = shape_size(s);
    return Tensor(std::move(s), randn(n, rng));
}

/// Direct evaluation of the normalised L1 distance with left sampling.
double reference_loss(const std::vector<double>& t, const std::vector<double>& s) {
    const std::size_t f = t.size() / s.size();
    double nt = 0, ns = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        nt += t[k * f] * t[k * f];
        ns += s[k] * s[k];
    }
    nt = std::sqrt(nt);
    ns = std::sqrt(ns);
    double l = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        l += std::abs(t[k * f] / nt - s[k] / ns);
    }
    return l;
}

} // namespace

TEST_CASE("map a 2x2 feature map") {
    // eta(0,0)=5, eta(1,0)=6, eta(1,1)=7, eta(0,1)=8, stored row-major in (i, j).
    const Tensor eta({2, 2}, {5, 8, 6, 7});
    const auto code = map_features(eta, build_mapping({2, 1}, Region({2, 2})));
    CHECK(code.values == std::vector<double>{5, 6, 7, 8});
    CHECK(code.valid_count() == 4u);
}

TEST_CASE("mapping preserves values") {
    std::mt19937 rng(4);
    const auto table = build_mapping({3, 3}, Region({5, 7, 7}), Layout::padded);
    const auto cst = map_features(Tensor({5, 7, 7}, 2.5), table);
    for (std::size_t v = 0; v < cst.length(); ++v) {
        CHECK(cst.values[v] == (cst.valid[v] ? 2.5 : 0.0));
    }
    for (auto layout : {Layout::padded, Layout::compacted}) {
        const auto t = build_mapping({3, 3}, Region({5, 7, 7}), layout);
        const auto eta = rand_tensor({5, 7, 7}, rng);
        const auto code = map_features(eta, t);
        double s = 0;
        for (double v : code.values) {
            s += v;
        }
        CHECK(s == doctest::Approx(eta.sum()).epsilon(1e-12));
        CHECK(code.valid_count() == 245u);
    }
    CHECK_THROWS_AS(map_features(Tensor({5, 7, 6}), table), Error);
}

TEST_CASE("weighted mapping") {
    std::mt19937 rng(5);
    const auto t = build_mapping({2, 2}, Region({4, 4}), Layout::compacted);
    const auto eta = rand_tensor({4, 4}, rng);
    const auto am = rand_tensor({4, 4}, rng);
    CHECK(map_features_weighted(eta, Tensor({4, 4}, 1.0), t) == map_features(eta, t));
    for (double v : map_features_weighted(eta, Tensor({4, 4}, 0.0), t).values) {
        CHECK(v == 0.0);
    }
    Tensor prod({4, 4});
    for (std::size_t x = 0; x < 16; ++x) {
        prod[x] = eta[x] * am[x];
    }
    CHECK(map_features_weighted(eta, am, t) == map_features(prod, t));
}

TEST_CASE("mapping adjoint") {
    std::mt19937 rng(6);
    for (auto layout : {Layout::padded, Layout::compacted}) {
        const auto t = build_mapping({3, 2}, Region({3, 4, 2}), layout);
        const auto eta = rand_tensor({3, 4, 2}, rng);
        const auto g = randn(t.code_length(), rng);
        const auto code = map_features(eta, t);
        const auto back = scatter_code(g, t);
        CHECK(dot(code.values, g) == doctest::Approx(dot(eta.values(), back.values())).epsilon(1e-13));
    }
}

TEST_CASE("nearest rescale") {
    std::vector<double> ramp(64);
    for (std::size_t k = 0; k < 64; ++k) {
        ramp[k] = static_cast<double>(k);
    }
    const auto r = nearest_rescale(LinearCode::dense(ramp), 16);
    for (std::size_t k = 0; k < 16; ++k) {
        CHECK(r.values[k] == 4.0 * static_cast<double>(k));
    }
    CHECK(nearest_rescale(LinearCode::dense(ramp), 16, RescaleMode::center).values[0] == 2.0);
    CHECK(nearest_rescale(LinearCode::dense(ramp), 64) == LinearCode::dense(ramp));
    const auto c = nearest_rescale(LinearCode::dense(std::vector<double>(27, 1.5)), 9);
    CHECK(c.values == std::vector<double>(9, 1.5));
    CHECK_THROWS_AS(nearest_rescale(LinearCode::dense(ramp), 10), Error);
    LinearCode holes = LinearCode::dense({1, 2, 3, 4});
    holes.valid[2] = 0;
    CHECK(nearest_rescale(holes, 2).valid == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("hd loss values") {
    std::mt19937 rng(7);
    const auto a = LinearCode::dense(randn(16, rng));
    CHECK(hd_loss(a, a).value == doctest::Approx(0.0));
    auto scaled = a;
    for (auto& v : scaled.values) {
        v *= 3.7;
    }
    CHECK(hd_loss(a, scaled).value == doctest::Approx(0.0));
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = randn(64, rng);
        const auto s = randn(16, rng);
        CHECK(hd_loss(LinearCode::dense(t), LinearCode::dense(s)).value ==
              doctest::Approx(reference_loss(t, s)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(hd_loss(LinearCode::dense(std::vector<double>(4, 0.0)), a), Error);
    CHECK_THROWS_AS(hd_loss(a, LinearCode::dense(std::vector<double>(16, 0.0))), Error);
    try {
        hd_loss(a, LinearCode::dense(std::vector<double>(16, 0.0)));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::degenerate_input);
    }
}

TEST_CASE("hd loss symmetry, scale invariance and bound") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> pos(0.01, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t L = 1 + static_cast<std::size_t>(trial % 40);
        const auto a = LinearCode::dense(randn(L, rng));
        const auto b = LinearCode::dense(randn(L, rng));
        const double ab = hd_loss(a, b).value;
        CHECK(ab == doctest::Approx(hd_loss(b, a).value).epsilon(1e-12));
        auto ca = a, db = b;
        const double c = pos(rng), d = pos(rng);
        for (auto& v : ca.values) {
            v *= c;
        }
        for (auto& v : db.values) {
            v *= d;
        }
        CHECK(std::abs(hd_loss(ca, db).value - ab) <= 1e-10);
        CHECK(ab >= 0.0);
        CHECK(ab <= 2.0 * std::sqrt(static_cast<double>(L)) + 1e-12);
    }
}

TEST_CASE("hd loss gradients match finite differences") {
    std::mt19937 rng(9);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t Ls = 4 + static_cast<std::size_t>(trial % 13);
        const std::size_t f = 1 + static_cast<std::size_t>(trial % 4);
        const auto t = randn(Ls * f, rng);
        const auto s = randn(Ls, rng);
        const auto mode = trial % 2 ? RescaleMode::left : RescaleMode::center;
        const auto r = hd_loss(LinearCode::dense(t), LinearCode::dense(s), {mode});
        const auto ft = [&](std::span<const double> x) {
            return hd_loss(LinearCode::dense({x.begin(), x.end()}), LinearCode::dense(s), {mode}).value;
        };
        const auto fs = [&](std::span<const double> x) {
            return hd_loss(LinearCode::dense(t), LinearCode::dense({x.begin(), x.end()}), {mode}).value;
        };
        const auto gt = grad_check(ft, t, r.grad_teacher);
        const auto gs = grad_check(fs, s, r.grad_student);
        worst = std::max({worst, gt.max_rel_error, gs.max_rel_error});
        CHECK(gs.checked > 0);
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("feature-level hd loss scatters gradients") {
    std::mt19937 rng(10);
    const auto tt = build_mapping({3, 2}, Region({4, 4, 4}), Layout::compacted);
    const auto ts = build_mapping({2, 2}, Region({4, 4}), Layout::compacted);
    const auto et = rand_tensor({4, 4, 4}, rng);
    const auto es = rand_tensor({4, 4}, rng);
    const auto r = hd_loss(et, tt, es, ts);
    CHECK(r.value == doctest::Approx(hd_loss(map_features(et, tt), map_features(es, ts)).value));
    const auto fs = [&](std::span<const double> x) {
        return hd_loss(et, tt, Tensor({4, 4}, {x.begin(), x.end()}), ts).value;
    };
    const auto ft = [&](std::span<const double> x) {
        return hd_loss(Tensor({4, 4, 4}, {x.begin(), x.end()}), tt, es, ts).value;
    };
    CHECK(grad_check(fs, es.values(), r.grad_student.values()).max_rel_error <= 1e-4);
    CHECK(grad_check(ft, et.values(), r.grad_teacher->values()).max_rel_error <= 1e-4);
}

TEST_CASE("padded codes work through the loss") {
    std::mt19937 rng(11);
    const auto tt = build_mapping({3, 3}, Region({5, 7, 7}), Layout::padded);
    const auto ts = build_mapping({2, 3}, Region({7, 7}), Layout::padded);
    const auto et = rand_tensor({5, 7, 7}, rng);
    const auto es = rand_tensor({7, 7}, rng);
    const auto r = hd_loss(et, tt, es, ts);
    CHECK(r.value > 0.0);
    const auto fs = [&](std::span<const double> x) {
        return hd_loss(et, tt, Tensor({7, 7}, {x.begin(), x.end()}), ts).value;
    };
    CHECK(grad_check(fs, es.values(), r.grad_student.values()).max_rel_error <= 1e-4);
}

TEST_CASE("vhd loss") {
    std::mt19937 rng(12);
    const auto tt = build_mapping({3, 2}, Region({4, 4, 4}), Layout::compacted);
    const auto ts = build_mapping({2, 2}, Region({4, 4}), Layout::compacted);
    const auto et = rand_tensor({4, 4, 4}, rng);
    const auto es = rand_tensor({4, 4}, rng);
    const Tensor ones3({4, 4, 4}, 1.0), ones2({4, 4}, 1.0);
    CHECK(vhd_loss(et, ones3, tt, es, ones2, ts).value == doctest::Approx(hd_loss(et, tt, es, ts).value));
    CHECK_THROWS_AS(vhd_loss(et, ones3, tt, es, Tensor({4, 4}, 0.0), ts), Error);

    for (int trial = 0; trial < 100; ++trial) {
        const auto at = rand_tensor({4, 4, 4}, rng);
        const auto as = rand_tensor({4, 4}, rng);
        const auto xt = rand_tensor({4, 4, 4}, rng);
        const auto xs = rand_tensor({4, 4}, rng);
        const auto r = vhd_loss(xt, at, tt, xs, as, ts);
        // Reference composition: weight, map, rescale, normalised L1.
        std::vector<double> ct(64), cs(16);
        const auto i2t = tt.index_to_cell();
        const auto i2s = ts.index_to_cell();
        for (std::size_t v = 0; v < 64; ++v) {
            ct[v] = xt[i2t[v]] * at[i2t[v]];
        }
        for (std::size_t v = 0; v < 16; ++v) {
            cs[v] = xs[i2s[v]] * as[i2s[v]];
        }
        CHECK(r.value == doctest::Approx(reference_loss(ct, cs)).epsilon(1e-12));
        const auto f_es = [&](std::span<const double> x) {
            return vhd_loss(xt, at, tt, Tensor({4, 4}, {x.begin(), x.end()}), as, ts).value;
        };
        const auto f_as = [&](std::span<const double> x) {
            return vhd_loss(xt, at, tt, xs, Tensor({4, 4}, {x.begin(), x.end()}), ts).value;
        };
        const auto f_et = [&](std::span<const double> x) {
            return vhd_loss(Tensor({4, 4, 4}, {x.begin(), x.end()}), at, tt, xs, as, ts).value;
        };
        CHECK(grad_check(f_es, xs.values(), r.grad_student.values()).max_rel_error <= 1e-4);
        CHECK(grad_check(f_as, as.values(), r.grad_am_student->values()).max_rel_error <= 1e-4);
        CHECK(grad_check(f_et, xt.values(), r.grad_teacher->values()).max_rel_error <= 1e-4);
    }
}

TEST_CASE("stacked losses average the channels") {
    std::mt19937 rng(13);
    const auto tt = build_mapping({3, 2}, Region({2, 4, 4}), Layout::compacted);
    const auto ts = build_mapping({2, 2}, Region({4, 4}), Layout::compacted);
    const auto et = rand_tensor({3, 2, 4, 4}, rng);
    const auto es = rand_tensor({3, 4, 4}, rng);
    const auto r = hd_loss_stacked(et, tt, es, ts);
    double mean = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        mean += hd_loss(et.slice0(c), tt, es.slice0(c), ts).value / 3.0;
    }
    CHECK(r.value == doctest::Approx(mean).epsilon(1e-13));
    const auto fs = [&](std::span<const double> x) {
        return hd_loss_stacked(et, tt, Tensor({3, 4, 4}, {x.begin(), x.end()}), ts).value;
    };
    CHECK(grad_check(fs, es.values(), r.grad_student.values()).max_rel_error <= 1e-4);

    const auto at = rand_tensor({2, 4, 4}, rng);
    const auto as = rand_tensor({4, 4}, rng);
    const auto rv = vhd_loss_stacked(et, at, tt, es, as, ts);
    const auto fa = [&](std::span<const double> x) {
        return vhd_loss_stacked(et, at, tt, es, Tensor({4, 4}, {x.begin(), x.end()}), ts).value;
    };
    CHECK(grad_check(fa, as.values(), rv.grad_am_student->values()).max_rel_error <= 1e-4);
    CHECK_THROWS_AS(hd_loss_stacked(et, tt, rand_tensor({2, 4, 4}, rng), ts), Error);
}

TEST_CASE("total loss") {
    CHECK(total_loss(1.25, 7.0, 0.0) == 1.25);
    CHECK(total_loss(0.0, 0.3, 10.0) == doctest::Approx(3.0));
    CHECK(total_loss(1.0, 1e-3, 1e3) == doctest::Approx(2.0));
    CHECK_THROWS_AS(total_loss(1.0, 1.0, -0.1), Error);
}

TEST_CASE("align layer") {
    std::mt19937 rng(14);
    const auto x = LinearCode::dense(randn(8, rng));
    CHECK(fc_align(x, AlignLayer::identity(8)).values == x.values);
    AlignLayer zb;
    zb.weights.assign(64, 0.0);
    zb.bias = randn(8, rng);
    CHECK(fc_align(x, zb).values == zb.bias);
    AlignLayer l;
    l.weights = randn(64, rng);
    l.bias = randn(8, rng);
    const auto y = fc_align(x, l);
    for (std::size_t r = 0; r < 8; ++r) {
        double acc = l.bias[r];
        for (std::size_t c = 0; c < 8; ++c) {
            acc += l.weights[r * 8 + c] * x.values[c];
        }
        CHECK(y.values[r] == doctest::Approx(acc).epsilon(1e-13));
    }
    CHECK_THROWS_AS(fc_align(LinearCode::dense(randn(7, rng)), l), Error);
}

TEST_CASE("align layer gradients through the loss") {
    std::mt19937 rng(15);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t L = 3 + static_cast<std::size_t>(trial % 6);
        const auto t = LinearCode::dense(randn(2 * L, rng));
        const auto s = LinearCode::dense(randn(L, rng));
        AlignLayer l;
        l.weights = randn(L * L, rng);
        l.bias = randn(L, rng);
        const auto aligned = fc_align(s, l);
        const auto lr = hd_loss(t, aligned);
        const auto g = fc_align_backward(s, l, lr.grad_student);
        const auto f_code = [&](std::span<const double> x) {
            return hd_loss(t, fc_align(LinearCode::dense({x.begin(), x.end()}), l)).value;
        };
        const auto f_w = [&](std::span<const double> x) {
            AlignLayer m = l;
            m.weights.assign(x.begin(), x.end());
            return hd_loss(t, fc_align(s, m)).value;
        };
        const auto f_b = [&](std::span<const double> x) {
            AlignLayer m = l;
            m.bias.assign(x.begin(), x.end());
            return hd_loss(t, fc_align(s, m)).value;
        };
        worst = std::max({worst, grad_check(f_code, s.values, g.code).max_rel_error,
                          grad_check(f_w, l.weights, g.weights).max_rel_error,
                          grad_check(f_b, l.bias, g.bias).max_rel_error});
    }
    CHECK(worst <= 1e-4);
}
