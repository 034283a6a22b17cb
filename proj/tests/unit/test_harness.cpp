#include "hd/curve/mapping.hpp"
#include "hd/error.hpp"
#include "hd/harness/baselines.hpp"
#include "hd/harness/config.hpp"
#include "hd/harness/data.hpp"
#include "hd/harness/metrics.hpp"
#include "hd/harness/train.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace hd;
using namespace hd::harness;

namespace {

HarnessConfig small_config() {
    HarnessConfig c;
    c.data.samples = 96;
    c.data.test_fraction = 0.5;
    c.epochs = 2;
    c.teacher_epochs = 2;
    c.batch = 8;
    c.width1 = 4;
    c.width2 = 8;
    c.channels = 4;
    return c;
}

template <class Fn>
ErrorKind kind_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::io;
}

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("synthetic data is deterministic per seed") {
    SynthConfig c;
    c.samples = 40;
    const auto a = make_synthetic(c, 3), b = make_synthetic(c, 3), other = make_synthetic(c, 4);
    CHECK(a.volumes == b.volumes);
    CHECK(a.slices == b.slices);
    CHECK(a.labels == b.labels);
    CHECK(a.test == b.test);
    CHECK_FALSE(a.volumes == other.volumes);
}

TEST_CASE("synthetic classes are balanced and split per class") {
    SynthConfig c;
    c.samples = 400;
    const auto d = make_synthetic(c, 11);
    std::vector<std::size_t> all(kBarClasses, 0), test(kBarClasses, 0);
    for (int l : d.labels) {
        ++all[static_cast<std::size_t>(l)];
    }
    for (auto k : d.test) {
        ++test[static_cast<std::size_t>(d.labels[k])];
    }
    for (std::size_t cls = 0; cls < kBarClasses; ++cls) {
        CHECK(all[cls] == 100);
        CHECK(test[cls] == 90);
    }
    CHECK(d.train.size() + d.test.size() == 400);
}

TEST_CASE("student slice is the middle depth slice of the volume") {
    SynthConfig c;
    c.samples = 8;
    const auto d = make_synthetic(c, 5);
    const std::size_t s = c.side;
    for (std::size_t n = 0; n < c.samples; ++n) {
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = 0; j < s; ++j) {
                CHECK(d.slices.at({n, 0, i, j}) == d.volumes.at({n, 0, s / 2, i, j}));
            }
        }
    }
}

TEST_CASE("random slices come from the volume and leave volumes unchanged") {
    SynthConfig c;
    c.samples = 16;
    c.depth_extent = 6;
    auto r = c;
    r.random_slice = true;
    const auto fixed = make_synthetic(c, 9), moved = make_synthetic(r, 9);
    CHECK(fixed.volumes == moved.volumes);
    const std::size_t s = c.side;
    std::size_t off_middle = 0;
    for (std::size_t n = 0; n < c.samples; ++n) {
        bool found = false;
        for (std::size_t k = 0; k < s && !found; ++k) {
            bool same = true;
            for (std::size_t q = 0; q < s * s && same; ++q) {
                same = moved.slices[n * s * s + q] == moved.volumes[(n * s + k) * s * s + q];
            }
            found = same;
            off_middle += same && k != s / 2;
        }
        CHECK(found);
    }
    CHECK(off_middle > 0);
}

TEST_CASE("rule classifier labels every generated volume") {
    SynthConfig c;
    c.samples = 200;
    const auto d = make_synthetic(c, 2);
    const std::size_t s = c.side;
    std::size_t right = 0;
    for (std::size_t n = 0; n < d.size(); ++n) {
        right += classify_by_rule(d.volumes.slice0(n).reshaped({s, s, s}), c) == d.labels[n];
    }
    CHECK(right == d.size());
}

TEST_CASE("synthetic config errors name the key") {
    SynthConfig c;
    c.samples = 3;
    CHECK(message_of([&] { c.validate(); }).find("samples") != std::string::npos);
    c = {};
    c.test_fraction = 1.0;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
}

TEST_CASE("reduce3d of a single slice returns it") {
    Tensor x({1, 2, 3}, {1, -2, 3, 4, 5, -6});
    const double one[] = {1.0};
    CHECK(reduce3d(x, DepthReduce::avg) == x.reshaped({2, 3}));
    CHECK(reduce3d(x, DepthReduce::max) == x.reshaped({2, 3}));
    CHECK(reduce3d(x, DepthReduce::conv, one) == x.reshaped({2, 3}));
}

TEST_CASE("reduce3d of a depth-constant volume") {
    Tensor x({4, 2, 2});
    for (std::size_t d = 0; d < 4; ++d) {
        for (std::size_t q = 0; q < 4; ++q) {
            x[d * 4 + q] = static_cast<double>(q) - 1.5;
        }
    }
    const Tensor slice = x.slice0(0);
    CHECK(reduce3d(x, DepthReduce::avg) == slice);
    CHECK(reduce3d(x, DepthReduce::max) == slice);
    const double quarter[] = {0.25, 0.25, 0.25, 0.25};
    const Tensor conv = reduce3d(x, DepthReduce::conv, quarter);
    for (std::size_t q = 0; q < 4; ++q) {
        CHECK(conv[q] == doctest::Approx(slice[q]).epsilon(1e-15));
    }
}

TEST_CASE("reduce3d matches brute force on 3x2x2") {
    const Tensor x({3, 2, 2}, {1, 7, -3, 2, 4, -1, 0, 9, -2, 5, 6, 3});
    const double k[] = {0.5, -1.0, 2.0};
    const Tensor avg = reduce3d(x, DepthReduce::avg), mx = reduce3d(x, DepthReduce::max),
                 conv = reduce3d(x, DepthReduce::conv, k);
    const double want_avg[] = {1.0, 11.0 / 3.0, 1.0, 14.0 / 3.0};
    const double want_max[] = {4, 7, 6, 9};
    const double want_conv[] = {0.5 - 4 - 4, 3.5 + 1 + 10, -1.5 - 0 + 12, 1 - 9 + 6};
    for (std::size_t q = 0; q < 4; ++q) {
        CHECK(avg[q] == doctest::Approx(want_avg[q]));
        CHECK(mx[q] == want_max[q]);
        CHECK(conv[q] == doctest::Approx(want_conv[q]));
    }
}

TEST_CASE("reduce3d argument errors") {
    const Tensor x({2, 2, 2}, 1.0);
    const double k3[] = {1, 2, 3};
    CHECK(kind_of([&] { (void)reduce3d(x, DepthReduce::conv); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { (void)reduce3d(x, DepthReduce::conv, k3); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { (void)reduce3d(Tensor({2, 2}), DepthReduce::avg); }) == ErrorKind::shape_mismatch);
    CHECK(kind_of([] { (void)parse_depth_reduce("median"); }) == ErrorKind::invalid_argument);
    CHECK(parse_depth_reduce("conv") == DepthReduce::conv);
    CHECK(std::string(to_string(DepthReduce::max)) == "max");
}

TEST_CASE("ari reproduces the published ActivityNet column") {
    const double stu[] = {61.42, 60.22};
    const double vhd[] = {63.71, 64.02};
    struct Row {
        double a, b, printed;
    };
    const Row rows[] = {{62.30, 61.45, 184.59}, {62.88, 62.27, 71.11}, {62.73, 62.70, 64.02},
                        {62.14, 61.23, 247.15}, {62.78, 61.88, 98.65}, {63.55, 63.46, 12.40}};
    for (const auto& r : rows) {
        const double bkd[] = {r.a, r.b};
        CHECK(std::abs(ari(stu, bkd, vhd) - r.printed) <= 0.25);
    }
}

TEST_CASE("ari of vhd against itself is zero") {
    const double stu[] = {61.42, 60.22};
    const double vhd[] = {63.71, 64.02};
    CHECK(ari(stu, vhd, vhd) == 0.0);
}

TEST_CASE("ari errors") {
    const double a[] = {1.0, 2.0};
    const double b[] = {1.0, 3.0};
    const double one[] = {1.0};
    CHECK(kind_of([&] { (void)ari(a, b, b); }) == ErrorKind::degenerate_input);
    CHECK(kind_of([&] { (void)ari(a, one, b); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { (void)ari({}, {}, {}); }) == ErrorKind::invalid_argument);
}

TEST_CASE("bench rows cover every spec") {
    const std::uint32_t sides[] = {2, 4, 8};
    const auto specs = specs_for_sides(3, sides);
    REQUIRE(specs.size() == 3);
    const auto rows = bench_curve(specs);
    REQUIRE(rows.size() == 3);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        CHECK(rows[r].points == std::uint64_t{sides[r]} * sides[r] * sides[r]);
        CHECK(rows[r].runs_ms.size() >= 5);
        CHECK(rows[r].median_ms >= *std::min_element(rows[r].runs_ms.begin(), rows[r].runs_ms.end()));
        CHECK(rows[r].median_ms <= *std::max_element(rows[r].runs_ms.begin(), rows[r].runs_ms.end()));
    }
    const auto j = to_json(rows);
    CHECK(j.size() == 3);
    CHECK(j[2]["side"] == 8);
    CHECK(j[2]["points"] == 512);
    CHECK(to_text(rows).find("median_ms") != std::string::npos);
    const std::uint32_t bad[] = {6};
    CHECK(kind_of([&] { (void)specs_for_sides(2, bad); }) == ErrorKind::invalid_argument);
}

TEST_CASE("config parses key-value text and JSON alike") {
    const auto text = parse_plan("# arms\n[run]\nalpha = 0.5\nloss_kind: none, hd\nseed = 9\nrandom_slice = true\n");
    const auto js = parse_plan(R"({"alpha": 0.5, "loss_kind": ["none", "hd"], "seed": 9, "random_slice": true})");
    CHECK(text.config.alpha == 0.5);
    CHECK(text.config.seed == 9);
    CHECK(text.config.data.random_slice);
    CHECK(text.arms == std::vector<LossKind>{LossKind::none, LossKind::hd});
    CHECK(to_json(text.config) == to_json(js.config));
    CHECK(text.arms == js.arms);
}

TEST_CASE("config errors name the offending key") {
    CHECK(message_of([] { (void)parse_plan("alpha = fast\n"); }).find("alpha") != std::string::npos);
    CHECK(message_of([] { (void)parse_plan("bogus_key = 1\n"); }).find("bogus_key") != std::string::npos);
    CHECK(message_of([] { (void)parse_plan(R"({"epochs": -3})"); }).find("epochs") != std::string::npos);
    CHECK(message_of([] { (void)parse_plan("loss_kind = hd, nope\n"); }).find("loss_kind") != std::string::npos);
    CHECK(kind_of([] { (void)parse_plan("{broken"); }) == ErrorKind::config);
    HarnessConfig c;
    c.distill_layer = 3;
    CHECK(message_of([&] { c.validate(); }).find("distill_layer") != std::string::npos);
}

TEST_CASE("seed override from the environment text") {
    HarnessConfig c;
    apply_seed_override(c, nullptr);
    CHECK(c.seed == 1);
    apply_seed_override(c, "42");
    CHECK(c.seed == 42);
    CHECK(kind_of([&] { apply_seed_override(c, "4x"); }) == ErrorKind::config);
}

TEST_CASE("untrained teacher sits near chance") {
    auto c = small_config();
    c.teacher_epochs = 0;
    const auto data = make_synthetic(c.data, c.seed);
    const auto t = train_teacher(data, c);
    CHECK(t.report.test_accuracy <= 50.0);
    CHECK(t.report.epoch_loss.empty());
}

TEST_CASE("training runs are reproducible and keep the teacher frozen") {
    auto c = small_config();
    const auto data = make_synthetic(c.data, c.seed);
    const auto teacher = train_teacher(data, c);
    const Net before = teacher.net;
    for (auto kind : {LossKind::none, LossKind::hd, LossKind::vhd, LossKind::avg, LossKind::max, LossKind::conv}) {
        CAPTURE(to_string(kind));
        c.loss_kind = kind;
        const auto a = train_student(data, &teacher, c);
        const auto b = train_student(data, &teacher, c);
        CHECK(a == b);
        CHECK(a.epoch_loss.size() == c.epochs);
        CHECK(a.test_accuracy >= 0.0);
        CHECK(a.test_accuracy <= 100.0);
        CHECK(teacher.net == before);
        if (kind != LossKind::none) {
            CHECK(a.epoch_distill.size() == c.epochs);
        }
    }
}

TEST_CASE("zero alpha hd run equals the control run") {
    auto c = small_config();
    const auto data = make_synthetic(c.data, c.seed);
    const auto teacher = train_teacher(data, c);
    c.loss_kind = LossKind::none;
    const auto control = train_student(data, &teacher, c);
    c.loss_kind = LossKind::hd;
    c.alpha = 0.0;
    const auto hd = train_student(data, &teacher, c);
    CHECK(hd.epoch_loss == control.epoch_loss);
    CHECK(hd.test_accuracy == control.test_accuracy);
    CHECK(hd.train_accuracy == control.train_accuracy);
}

TEST_CASE("random slices train with the align layer") {
    auto c = small_config();
    c.data.random_slice = true;
    c.align = AlignSide::student;
    c.loss_kind = LossKind::hd;
    const auto data = make_synthetic(c.data, c.seed);
    const auto teacher = train_teacher(data, c);
    const auto r = train_student(data, &teacher, c);
    CHECK(r.epoch_distill.size() == c.epochs);
    CHECK(to_json(r)["config"]["random_slice"] == true);
}

TEST_CASE("distillation needs a teacher") {
    auto c = small_config();
    c.loss_kind = LossKind::hd;
    const auto data = make_synthetic(c.data, c.seed);
    CHECK(kind_of([&] { (void)train_student(data, nullptr, c); }) == ErrorKind::invalid_argument);
}

TEST_CASE("activation maps have one spatial map per sample") {
    auto c = small_config();
    const auto data = make_synthetic(c.data, c.seed);
    const auto net = init_net(teacher_spec(c), 1);
    const std::vector<std::size_t> rows{0, 1, 2};
    const auto maps = activation_maps(net, gather_rows(data.volumes, rows), 1);
    CHECK(maps.shape() == Shape{3, 4, 8, 8});
    CHECK(maps.all_finite());
}
