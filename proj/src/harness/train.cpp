#include "hd/harness/train.hpp"

#include "hd/activation/activation.hpp"
#include "hd/curve/mapping.hpp"
#include "hd/losses/loss.hpp"
#include "hd/error.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace hd::harness {

namespace {

/// Seed streams for the parts of one run.
enum Stream : std::uint64_t { kTeacherInit = 1, kStudentInit = 2, kTeacherShuffle = 3, kStudentShuffle = 4 };

std::uint64_t derive(std::uint64_t seed, Stream s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<int> labels_of(const SynthDataset& d, std::span<const std::size_t> idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto k : idx) {
        out.push_back(d.labels[k]);
    }
    return out;
}

/// Code order of a [spatial...] map. With swap_last, the curve walks the
/// last two axes in exchanged roles.
CodeOrder hilbert_order(const Shape& spatial, bool swap_last) {
    std::vector<std::uint32_t> extents(spatial.begin(), spatial.end());
    const std::size_t r = extents.size();
    if (swap_last) {
        std::swap(extents[r - 1], extents[r - 2]);
    }
    curve::Region region(extents);
    const curve::CurveSpec spec{static_cast<int>(r), curve::select_order(region)};
    auto order = code_order(curve::build_mapping(spec, region, curve::Layout::compacted));
    if (swap_last) {
        for (auto& o : order) {
            if (o == curve::MappingTable::kNone) {
                continue;
            }
            auto cell = region.point(o);
            std::swap(cell[r - 1], cell[r - 2]);
            std::uint32_t off = 0;
            for (std::size_t a = 0; a < r; ++a) {
                off = off * static_cast<std::uint32_t>(spatial[a]) + cell[a];
            }
            o = off;
        }
    }
    return order;
}

Shape spatial_of(const Tensor& t) { return Shape(t.shape().begin() + 2, t.shape().end()); }

/// Leading `channels` channels of a [N, C, ...] tensor.
Tensor narrow(const Tensor& x, std::size_t channels) {
    Tape t;
    return t.value(narrow_channels(t, t.constant(x), channels));
}

struct Epoch {
    double loss = 0;
    double distill = 0;
    std::size_t batches = 0;
};

void check_finite(double v, std::size_t epoch) {
    require(std::isfinite(v), ErrorKind::non_finite, "training diverged in epoch " + std::to_string(epoch));
}

} // namespace

NetSpec teacher_spec(const HarnessConfig& c) {
    return {3, 1, c.width1, c.width2, kBarClasses, c.teacher_depth_stride, c.head_shift};
}
NetSpec student_spec(const HarnessConfig& c) { return {2, 1, c.width1, c.width2, kBarClasses, 2, c.head_shift}; }

double accuracy(const Net& net, const Tensor& inputs, const std::vector<int>& labels,
                const std::vector<std::size_t>& index) {
    if (index.empty()) {
        return 0.0;
    }
    const auto pred = predict(logits_values(net, gather_rows(inputs, index)));
    std::size_t hits = 0;
    for (std::size_t r = 0; r < index.size(); ++r) {
        hits += pred[r] == labels[index[r]] ? 1 : 0;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(index.size());
}

Tensor activation_maps(const Net& net, const Tensor& inputs, int layer) {
    const Tensor feats = layer_values(net, inputs, layer);
    Tape t;
    const auto v = bind(t, net, false);
    const Var f = t.param(feats);
    // Samples are independent, so one backward of the total score gives every
    // sample's all-class gradient.
    t.backward(sum(t, logits_from(t, net, v, layer, f)));
    const Tensor& g = t.grad(f);
    const std::size_t n = feats.dim(0);
    Shape am_shape = feats.shape();
    am_shape.erase(am_shape.begin() + 1);
    Tensor out(am_shape);
    const std::size_t z = out.size() / n;
    for (std::size_t r = 0; r < n; ++r) {
        const auto stack = activation::GradientStack::summed(g.slice0(r), net.spec.classes);
        const auto am = activation::activation_map(feats.slice0(r), activation::channel_weights(stack));
        std::copy(am.values().begin(), am.values().end(), out.data() + r * z);
    }
    return out;
}

Teacher train_teacher(const SynthDataset& data, const HarnessConfig& config) {
    config.validate();
    require(!data.train.empty(), ErrorKind::invalid_argument, "empty training split");
    Teacher out;
    out.net = init_net(teacher_spec(config), derive(config.seed, kTeacherInit));
    std::mt19937_64 rng(derive(config.seed, kTeacherShuffle));
    auto order = data.train;
    for (std::size_t e = 0; e < config.teacher_epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        Epoch ep;
        for (std::size_t b = 0; b < order.size(); b += config.batch) {
            const std::span<const std::size_t> idx(order.data() + b, std::min(config.batch, order.size() - b));
            Tape t;
            const auto v = bind(t, out.net, true);
            const auto tr = forward(t, out.net, v, t.constant(gather_rows(data.volumes, idx)));
            const auto labels = labels_of(data, idx);
            const Var loss = softmax_cross_entropy(t, tr.logits, labels);
            check_finite(t.value(loss)[0], e);
            t.backward(loss);
            sgd_step(out.net, t, v, config.teacher_lr);
            ep.loss += t.value(loss)[0];
            ++ep.batches;
        }
        out.report.epoch_loss.push_back(ep.loss / static_cast<double>(ep.batches));
    }
    out.report.role = "teacher";
    out.report.seed = config.seed;
    out.report.config = config;
    out.report.train_accuracy = accuracy(out.net, data.volumes, data.labels, data.train);
    out.report.test_accuracy = accuracy(out.net, data.volumes, data.labels, data.test);
    return out;
}

RunReport train_student(const SynthDataset& data, const Teacher* teacher, const HarnessConfig& config) {
    config.validate();
    require(!data.train.empty(), ErrorKind::invalid_argument, "empty training split");
    const LossKind kind = config.loss_kind;
    require(kind == LossKind::none || teacher != nullptr, ErrorKind::invalid_argument,
            std::string("loss_kind ") + to_string(kind) + " needs a teacher");
    const int layer = config.distill_layer;
    const std::size_t channels = config.channels;
    Net net = init_net(student_spec(config), derive(config.seed, kStudentInit));

    RunReport rep;
    rep.role = "student";
    rep.loss_kind = kind;
    rep.seed = config.seed;
    rep.config = config;

    // Teacher-side targets are fixed, so they are computed once.
    Tensor targets;
    DistillSpec spec;
    spec.rescale = config.rescale;
    Tensor kernel;
    Tensor align_w, align_b;
    if (kind != LossKind::none) {
        require(teacher->net.spec.dims == 3, ErrorKind::invalid_argument, "teacher must be volumetric");
        const auto& ts = teacher->net.spec;
        require((layer == 1 ? ts.width1 : ts.width2) >= channels, ErrorKind::shape_mismatch,
                "teacher distillation layer has fewer channels than requested");
        const Tensor feats = layer_values(teacher->net, data.volumes, layer);
        targets = narrow(feats, channels);
        const Shape t_sp = spatial_of(feats);
        const Shape s_sp = spatial_of(layer_values(net, gather_rows(data.slices, std::vector<std::size_t>{0}), layer));
        if (kind == LossKind::hd || kind == LossKind::vhd) {
            spec.teacher_order = hilbert_order(t_sp, config.swap_teacher_axes);
            spec.student_order = hilbert_order(s_sp, false);
            require(spec.teacher_order.size() % spec.student_order.size() == 0, ErrorKind::shape_mismatch,
                    "teacher code length is not a multiple of the student code length");
        } else {
            require(t_sp.size() == 3 && Shape(t_sp.begin() + 1, t_sp.end()) == s_sp, ErrorKind::shape_mismatch,
                    "depth reduction needs matching in-plane extents at the distillation layer");
            spec.teacher_order = raster_order(shape_size(s_sp));
            spec.student_order = spec.teacher_order;
            if (kind == LossKind::conv) {
                kernel = Tensor({t_sp[0]}, 1.0 / static_cast<double>(t_sp[0]));
            }
        }
        if (kind == LossKind::vhd) {
            const Tensor am = activation_maps(teacher->net, data.volumes, layer);
            Tape t;
            targets = t.value(weight_by_map(t, t.constant(targets), t.constant(am)));
            std::size_t active = 0;
            for (std::size_t r = 0; r < data.size(); ++r) {
                active += activation::activation_mask(am.slice0(r), config.theta).active_count();
            }
            rep.active_fraction = static_cast<double>(active) / static_cast<double>(am.size());
        }
        if (config.align == AlignSide::student) {
            const auto a = losses::AlignLayer::identity(spec.student_order.size());
            align_w = Tensor({a.length(), a.length()}, a.weights);
            align_b = Tensor({a.length()}, a.bias);
        }
    }

    std::mt19937_64 rng(derive(config.seed, kStudentShuffle));
    auto order = data.train;
    for (std::size_t e = 0; e < config.epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        Epoch ep;
        for (std::size_t b = 0; b < order.size(); b += config.batch) {
            const std::span<const std::size_t> idx(order.data() + b, std::min(config.batch, order.size() - b));
            const Tensor x = gather_rows(data.slices, idx);
            Tape t;
            const auto v = bind(t, net, true);
            const auto tr = forward(t, net, v, t.constant(x));
            const auto labels = labels_of(data, idx);
            Var loss = softmax_cross_entropy(t, tr.logits, labels);
            double distill = 0;
            Var kv, aw, ab;
            if (kind != LossKind::none) {
                Var fs = narrow_channels(t, tr.layer(layer), channels);
                Var ft = t.constant(gather_rows(targets, idx));
                if (kind == LossKind::vhd) {
                    fs = weight_by_map(t, fs, t.constant(activation_maps(net, x, layer)));
                } else if (kind == LossKind::avg || kind == LossKind::max || kind == LossKind::conv) {
                    const auto mode = kind == LossKind::avg   ? DepthReduce::avg
                                      : kind == LossKind::max ? DepthReduce::max
                                                              : DepthReduce::conv;
                    if (mode == DepthReduce::conv) {
                        kv = t.param(kernel);
                    }
                    ft = reduce_depth(t, ft, mode, kv);
                }
                DistillSpec s = spec;
                if (config.align == AlignSide::student) {
                    aw = s.align_w = t.param(align_w);
                    ab = s.align_b = t.param(align_b);
                }
                DistillStats stats;
                const Var d = distill_loss(t, ft, fs, s, &stats);
                rep.skipped_pairs += stats.skipped;
                distill = t.value(d)[0];
                loss = add(t, loss, scale(t, d, config.alpha));
            }
            check_finite(t.value(loss)[0], e);
            t.backward(loss);
            sgd_step(net, t, v, config.lr);
            const auto step = [&](Tensor& p, Var var) {
                if (var.valid()) {
                    const auto& g = t.grad(var);
                    for (std::size_t k = 0; k < p.size(); ++k) {
                        p[k] -= config.lr * g[k];
                    }
                }
            };
            step(kernel, kv);
            step(align_w, aw);
            step(align_b, ab);
            ep.loss += t.value(loss)[0];
            ep.distill += distill;
            ++ep.batches;
        }
        rep.epoch_loss.push_back(ep.loss / static_cast<double>(ep.batches));
        if (kind != LossKind::none) {
            rep.epoch_distill.push_back(ep.distill / static_cast<double>(ep.batches));
        }
    }
    rep.train_accuracy = accuracy(net, data.slices, data.labels, data.train);
    rep.test_accuracy = accuracy(net, data.slices, data.labels, data.test);
    return rep;
}

nlohmann::json to_json(const RunReport& r) {
    nlohmann::json j = {{"role", r.role},
                        {"loss_kind", to_string(r.loss_kind)},
                        {"seed", r.seed},
                        {"epoch_loss", r.epoch_loss},
                        {"train_accuracy", r.train_accuracy},
                        {"test_accuracy", r.test_accuracy},
                        {"config", to_json(r.config)}};
    if (!r.epoch_distill.empty()) {
        j["epoch_distill"] = r.epoch_distill;
        j["skipped_pairs"] = r.skipped_pairs;
    }
    if (r.loss_kind == LossKind::vhd) {
        j["active_fraction"] = r.active_fraction;
    }
    return j;
}

std::string to_text(const std::vector<RunReport>& reports) {
    std::ostringstream os;
    os << std::left << std::setw(9) << "role" << std::setw(6) << "kind" << std::right << std::setw(8) << "seed"
       << std::setw(8) << "epochs" << std::setw(12) << "final_loss" << std::setw(10) << "train%" << std::setw(10)
       << "test%" << '\n';
    for (const auto& r : reports) {
        os << std::left << std::setw(9) << r.role << std::setw(6)
           << (r.role == "teacher" ? "-" : to_string(r.loss_kind)) << std::right << std::setw(8) << r.seed
           << std::setw(8) << r.epoch_loss.size() << std::fixed << std::setprecision(4) << std::setw(12)
           << (r.epoch_loss.empty() ? 0.0 : r.epoch_loss.back()) << std::setprecision(2) << std::setw(10)
           << r.train_accuracy << std::setw(10) << r.test_accuracy << '\n';
        os.unsetf(std::ios::fixed);
    }
    return os.str();
}

} // namespace hd::harness
