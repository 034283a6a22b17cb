#include "hd/losses/loss.hpp"

#include "hd/error.hpp"

#include <cmath>

namespace hd::losses {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

/// d/da of sum(g * a/||a||) for the given upstream g.
std::vector<double> normalize_backward(std::span<const double> u, double norm, std::span<const double> g) {
    const double ug = dot(u, g);
    std::vector<double> out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        out[k] = (g[k] - u[k] * ug) / norm;
    }
    return out;
}

void check_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        require(std::isfinite(x), ErrorKind::non_finite, std::string(what) + " has non-finite values");
    }
}

Tensor times(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    for (std::size_t x = 0; x < out.size(); ++x) {
        out[x] *= b[x];
    }
    return out;
}

void accumulate(Tensor& into, const Tensor& add, double scale) {
    for (std::size_t x = 0; x < into.size(); ++x) {
        into[x] += scale * add[x];
    }
}

} // namespace

CodeLoss hd_loss(const LinearCode& teacher, const LinearCode& student, const LossOptions& opts) {
    check_finite(teacher.values, "teacher code");
    check_finite(student.values, "student code");
    const auto rt = nearest_rescale(teacher, student.length(), opts.rescale);
    const double nt = l2_norm(rt.values);
    const double ns = l2_norm(student.values);
    require(nt > 0.0, ErrorKind::degenerate_input, "teacher code has zero norm");
    require(ns > 0.0, ErrorKind::degenerate_input, "student code has zero norm");

    const std::size_t n = student.length();
    std::vector<double> u(n), w(n), g(n), gneg(n);
    CodeLoss out;
    for (std::size_t k = 0; k < n; ++k) {
        u[k] = rt.values[k] / nt;
        w[k] = student.values[k] / ns;
        out.value += std::abs(u[k] - w[k]);
        g[k] = sign(u[k] - w[k]);
        gneg[k] = -g[k];
    }
    out.grad_teacher = rescale_adjoint(normalize_backward(u, nt, g), teacher.length(), opts.rescale);
    out.grad_student = normalize_backward(w, ns, gneg);
    return out;
}

LossReport hd_loss(const Tensor& eta_t, const MappingTable& table_t, const Tensor& eta_s,
                   const MappingTable& table_s, const LossOptions& opts) {
    const auto cl = hd_loss(map_features(eta_t, table_t), map_features(eta_s, table_s), opts);
    LossReport r;
    r.value = cl.value;
    r.grad_student = scatter_code(cl.grad_student, table_s);
    r.grad_teacher = scatter_code(cl.grad_teacher, table_t);
    return r;
}

LossReport vhd_loss(const Tensor& eta_t, const Tensor& am_t, const MappingTable& table_t, const Tensor& eta_s,
                    const Tensor& am_s, const MappingTable& table_s, const LossOptions& opts) {
    const auto cl = hd_loss(map_features_weighted(eta_t, am_t, table_t),
                            map_features_weighted(eta_s, am_s, table_s), opts);
    const auto gs = scatter_code(cl.grad_student, table_s);
    const auto gt = scatter_code(cl.grad_teacher, table_t);
    LossReport r;
    r.value = cl.value;
    r.grad_student = times(gs, am_s);
    r.grad_am_student = times(gs, eta_s);
    r.grad_teacher = times(gt, am_t);
    r.grad_am_teacher = times(gt, eta_t);
    return r;
}

namespace {

template <class PerChannel>
LossReport stacked(const Tensor& eta_t, const Tensor& eta_s, PerChannel&& per_channel, bool weighted) {
    require(eta_t.rank() >= 2 && eta_s.rank() >= 2, ErrorKind::shape_mismatch,
            "stacked features need a leading channel axis");
    const std::size_t channels = eta_t.dim(0);
    require(channels > 0 && eta_s.dim(0) == channels, ErrorKind::shape_mismatch,
            "teacher and student channel counts differ");
    const double inv = 1.0 / static_cast<double>(channels);
    LossReport out;
    out.grad_student = Tensor(eta_s.shape());
    out.grad_teacher = Tensor(eta_t.shape());
    const std::size_t zs = eta_s.size() / channels;
    const std::size_t zt = eta_t.size() / channels;
    for (std::size_t c = 0; c < channels; ++c) {
        const auto r = per_channel(eta_t.slice0(c), eta_s.slice0(c));
        out.value += r.value * inv;
        for (std::size_t x = 0; x < zs; ++x) {
            out.grad_student[c * zs + x] = r.grad_student[x] * inv;
        }
        for (std::size_t x = 0; x < zt; ++x) {
            (*out.grad_teacher)[c * zt + x] = (*r.grad_teacher)[x] * inv;
        }
        if (weighted) {
            if (!out.grad_am_student) {
                out.grad_am_student = Tensor(r.grad_am_student->shape());
                out.grad_am_teacher = Tensor(r.grad_am_teacher->shape());
            }
            accumulate(*out.grad_am_student, *r.grad_am_student, inv);
            accumulate(*out.grad_am_teacher, *r.grad_am_teacher, inv);
        }
    }
    return out;
}

} // namespace

LossReport hd_loss_stacked(const Tensor& eta_t, const MappingTable& table_t, const Tensor& eta_s,
                           const MappingTable& table_s, const LossOptions& opts) {
    return stacked(
        eta_t, eta_s,
        [&](const Tensor& t, const Tensor& s) { return hd_loss(t, table_t, s, table_s, opts); }, false);
}

LossReport vhd_loss_stacked(const Tensor& eta_t, const Tensor& am_t, const MappingTable& table_t,
                            const Tensor& eta_s, const Tensor& am_s, const MappingTable& table_s,
                            const LossOptions& opts) {
    return stacked(
        eta_t, eta_s,
        [&](const Tensor& t, const Tensor& s) { return vhd_loss(t, am_t, table_t, s, am_s, table_s, opts); },
        true);
}

double total_loss(double ce, double distill, double alpha) {
    require(alpha >= 0.0, ErrorKind::invalid_argument, "alpha must be non-negative");
    return ce + alpha * distill;
}

AlignLayer AlignLayer::identity(std::size_t length) {
    AlignLayer l;
    l.weights.assign(length * length, 0.0);
    for (std::size_t k = 0; k < length; ++k) {
        l.weights[k * length + k] = 1.0;
    }
    l.bias.assign(length, 0.0);
    return l;
}

LinearCode fc_align(const LinearCode& code, const AlignLayer& layer) {
    const std::size_t n = layer.length();
    require(layer.weights.size() == n * n, ErrorKind::shape_mismatch, "align weights must be square");
    require(code.length() == n, ErrorKind::shape_mismatch,
            "code length " + std::to_string(code.length()) + " does not match align layer " + std::to_string(n));
    std::vector<double> out(layer.bias);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = layer.weights.data() + r * n;
        double acc = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            acc += row[c] * code.values[c];
        }
        out[r] += acc;
    }
    return LinearCode::dense(std::move(out));
}

AlignGrads fc_align_backward(const LinearCode& code, const AlignLayer& layer, std::span<const double> grad_out) {
    const std::size_t n = layer.length();
    require(code.length() == n && grad_out.size() == n && layer.weights.size() == n * n, ErrorKind::shape_mismatch,
            "align backward size mismatch");
    AlignGrads g;
    g.code.assign(n, 0.0);
    g.weights.assign(n * n, 0.0);
    g.bias.assign(grad_out.begin(), grad_out.end());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            g.code[c] += layer.weights[r * n + c] * grad_out[r];
            g.weights[r * n + c] = grad_out[r] * code.values[c];
        }
    }
    return g;
}

} // namespace hd::losses
