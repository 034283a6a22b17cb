#include "hd/harness/tape.hpp"

#include "hd/error.hpp"
#include "hd/losses/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hd::harness {

Var Tape::constant(Tensor value) {
    nodes_.push_back({std::move(value), Tensor(), false, false, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Tensor value) {
    nodes_.push_back({std::move(value), Tensor(), true, false, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward backward) {
    bool needs = false;
    for (Var v : inputs) {
        needs = needs || (v.valid() && needs_grad(v));
    }
    nodes_.push_back({std::move(value), Tensor(), needs, false, needs ? std::move(backward) : nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buffer(Var v) {
    auto& n = nodes_.at(static_cast<std::size_t>(v.id));
    if (!n.has_grad) {
        n.grad = Tensor(n.value.shape());
        n.has_grad = true;
    }
    return n.grad;
}

const Tensor& Tape::grad(Var v) { return grad_buffer(v); }

void Tape::backward(Var root) {
    require(value(root).size() == 1, ErrorKind::shape_mismatch, "backward needs a scalar root");
    grad_buffer(root).fill(1.0);
    for (int id = root.id; id >= 0; --id) {
        auto& n = nodes_[static_cast<std::size_t>(id)];
        if (n.needs_grad && n.has_grad && n.backward) {
            // The closure may grow other nodes' buffers but never this one.
            const Tensor g = n.grad;
            n.backward(*this, g);
        }
    }
}

namespace {

struct Geometry3 {
    std::size_t n, ci, co, d, h, w, kd, kh, kw, od, oh, ow;
    int sd, sh, sw, pd, ph, pw;
};

std::size_t out_extent(std::size_t in, std::size_t k, int stride, int pad) {
    const auto span = static_cast<std::int64_t>(in) + 2 * pad - static_cast<std::int64_t>(k);
    require(span >= 0 && stride >= 1, ErrorKind::shape_mismatch, "convolution kernel larger than padded input");
    return static_cast<std::size_t>(span / stride + 1);
}

/// Valid output range [lo, hi) along one axis for kernel tap kk.
void tap_range(std::size_t out, std::size_t in, int stride, int pad, std::size_t kk, std::size_t& lo,
               std::size_t& hi) {
    // in index = o * stride - pad + kk must be in [0, in)
    const std::int64_t off = static_cast<std::int64_t>(kk) - pad;
    std::int64_t l = off >= 0 ? 0 : (-off + stride - 1) / stride;
    std::int64_t u = (static_cast<std::int64_t>(in) - 1 - off);
    u = u < 0 ? -1 : u / stride;
    l = std::max<std::int64_t>(l, 0);
    u = std::min<std::int64_t>(u, static_cast<std::int64_t>(out) - 1);
    lo = static_cast<std::size_t>(l);
    hi = u < l ? lo : static_cast<std::size_t>(u + 1);
}

template <class Body>
void for_taps(const Geometry3& g, Body&& body) {
    for (std::size_t a = 0; a < g.kd; ++a) {
        std::size_t d0, d1;
        tap_range(g.od, g.d, g.sd, g.pd, a, d0, d1);
        for (std::size_t b = 0; b < g.kh; ++b) {
            std::size_t h0, h1;
            tap_range(g.oh, g.h, g.sh, g.ph, b, h0, h1);
            for (std::size_t c = 0; c < g.kw; ++c) {
                std::size_t w0, w1;
                tap_range(g.ow, g.w, g.sw, g.pw, c, w0, w1);
                body(a, b, c, d0, d1, h0, h1, w0, w1);
            }
        }
    }
}

void conv_forward(const Geometry3& g, const double* x, const double* w, const double* bias, double* y) {
    const std::size_t in_sp = g.d * g.h * g.w, out_sp = g.od * g.oh * g.ow, ksz = g.kd * g.kh * g.kw;
    for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t co = 0; co < g.co; ++co) {
            double* yo = y + (n * g.co + co) * out_sp;
            std::fill(yo, yo + out_sp, bias ? bias[co] : 0.0);
            for (std::size_t ci = 0; ci < g.ci; ++ci) {
                const double* xi = x + (n * g.ci + ci) * in_sp;
                const double* wk = w + (co * g.ci + ci) * ksz;
                for_taps(g, [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d0, std::size_t d1,
                                std::size_t h0, std::size_t h1, std::size_t w0, std::size_t w1) {
                    const double wt = wk[(a * g.kh + b) * g.kw + c];
                    for (std::size_t od = d0; od < d1; ++od) {
                        const std::size_t id = od * static_cast<std::size_t>(g.sd) + a - static_cast<std::size_t>(g.pd);
                        for (std::size_t oh = h0; oh < h1; ++oh) {
                            const std::size_t ih =
                                oh * static_cast<std::size_t>(g.sh) + b - static_cast<std::size_t>(g.ph);
                            double* yr = yo + (od * g.oh + oh) * g.ow;
                            const double* xr = xi + (id * g.h + ih) * g.w + c - static_cast<std::size_t>(g.pw);
                            const auto sw = static_cast<std::size_t>(g.sw);
                            for (std::size_t ow = w0; ow < w1; ++ow) {
                                yr[ow] += wt * xr[ow * sw];
                            }
                        }
                    }
                });
            }
        }
    }
}

void conv_backward(const Geometry3& g, const double* x, const double* w, const double* gy, double* gx, double* gw,
                   double* gb) {
    const std::size_t in_sp = g.d * g.h * g.w, out_sp = g.od * g.oh * g.ow, ksz = g.kd * g.kh * g.kw;
    for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t co = 0; co < g.co; ++co) {
            const double* go = gy + (n * g.co + co) * out_sp;
            if (gb) {
                double s = 0;
                for (std::size_t k = 0; k < out_sp; ++k) {
                    s += go[k];
                }
                gb[co] += s;
            }
            for (std::size_t ci = 0; ci < g.ci; ++ci) {
                const double* xi = x + (n * g.ci + ci) * in_sp;
                double* gxi = gx ? gx + (n * g.ci + ci) * in_sp : nullptr;
                const double* wk = w + (co * g.ci + ci) * ksz;
                double* gwk = gw ? gw + (co * g.ci + ci) * ksz : nullptr;
                for_taps(g, [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d0, std::size_t d1,
                                std::size_t h0, std::size_t h1, std::size_t w0, std::size_t w1) {
                    const std::size_t tap = (a * g.kh + b) * g.kw + c;
                    const double wt = wk[tap];
                    double acc = 0.0;
                    const auto sw = static_cast<std::size_t>(g.sw);
                    for (std::size_t od = d0; od < d1; ++od) {
                        const std::size_t id = od * static_cast<std::size_t>(g.sd) + a - static_cast<std::size_t>(g.pd);
                        for (std::size_t oh = h0; oh < h1; ++oh) {
                            const std::size_t ih =
                                oh * static_cast<std::size_t>(g.sh) + b - static_cast<std::size_t>(g.ph);
                            const double* gr = go + (od * g.oh + oh) * g.ow;
                            const std::size_t base = (id * g.h + ih) * g.w + c - static_cast<std::size_t>(g.pw);
                            const double* xr = xi + base;
                            if (gxi) {
                                double* gxr = gxi + base;
                                for (std::size_t ow = w0; ow < w1; ++ow) {
                                    gxr[ow * sw] += wt * gr[ow];
                                }
                            }
                            for (std::size_t ow = w0; ow < w1; ++ow) {
                                acc += xr[ow * sw] * gr[ow];
                            }
                        }
                    }
                    if (gwk) {
                        gwk[tap] += acc;
                    }
                });
            }
        }
    }
}

Var conv_nd(Tape& t, Var x, Var w, Var b, ConvGeom cg, int dims) {
    const auto& X = t.value(x);
    const auto& W = t.value(w);
    const std::size_t rank = static_cast<std::size_t>(dims) + 2;
    require(X.rank() == rank && W.rank() == rank, ErrorKind::shape_mismatch,
            "conv" + std::to_string(dims) + "d expects rank-" + std::to_string(rank) + " input and weight");
    require(W.dim(1) == X.dim(1), ErrorKind::shape_mismatch, "conv input channels do not match weight");
    Geometry3 g{};
    g.n = X.dim(0);
    g.ci = X.dim(1);
    g.co = W.dim(0);
    g.d = dims == 3 ? X.dim(2) : 1;
    g.h = X.dim(rank - 2);
    g.w = X.dim(rank - 1);
    g.kd = dims == 3 ? W.dim(2) : 1;
    g.kh = W.dim(rank - 2);
    g.kw = W.dim(rank - 1);
    g.sd = dims == 3 ? (cg.depth_stride > 0 ? cg.depth_stride : cg.stride) : 1;
    g.pd = dims == 3 ? cg.pad : 0;
    g.sh = g.sw = cg.stride;
    g.ph = g.pw = cg.pad;
    g.od = out_extent(g.d, g.kd, g.sd, g.pd);
    g.oh = out_extent(g.h, g.kh, g.sh, g.ph);
    g.ow = out_extent(g.w, g.kw, g.sw, g.pw);
    if (b.valid()) {
        require(t.value(b).size() == g.co, ErrorKind::shape_mismatch, "conv bias size mismatch");
    }
    Shape out_shape = dims == 3 ? Shape{g.n, g.co, g.od, g.oh, g.ow} : Shape{g.n, g.co, g.oh, g.ow};
    Tensor Y(out_shape);
    conv_forward(g, X.data(), W.data(), b.valid() ? t.value(b).data() : nullptr, Y.data());
    return t.record(std::move(Y), {x, w, b}, [g, x, w, b](Tape& tp, const Tensor& gy) {
        double* gx = tp.needs_grad(x) ? tp.grad_buffer(x).data() : nullptr;
        double* gw = tp.needs_grad(w) ? tp.grad_buffer(w).data() : nullptr;
        double* gb = b.valid() && tp.needs_grad(b) ? tp.grad_buffer(b).data() : nullptr;
        conv_backward(g, tp.value(x).data(), tp.value(w).data(), gy.data(), gx, gw, gb);
    });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    require(a.shape() == b.shape(), ErrorKind::shape_mismatch,
            std::string(op) + ": shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()) + " differ");
}

} // namespace

Var conv2d(Tape& t, Var x, Var w, Var b, ConvGeom g) { return conv_nd(t, x, w, b, g, 2); }
Var conv3d(Tape& t, Var x, Var w, Var b, ConvGeom g) { return conv_nd(t, x, w, b, g, 3); }

Var relu(Tape& t, Var x) {
    Tensor y = t.value(x);
    for (auto& v : y.values()) {
        v = v > 0 ? v : 0.0;
    }
    return t.record(std::move(y), {x}, [x](Tape& tp, const Tensor& g) {
        const auto& X = tp.value(x);
        auto& gx = tp.grad_buffer(x);
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (X[k] > 0) {
                gx[k] += g[k];
            }
        }
    });
}

Var global_avg_pool(Tape& t, Var x) {
    const auto& X = t.value(x);
    require(X.rank() >= 3, ErrorKind::shape_mismatch, "pooling expects [N, C, spatial...]");
    const std::size_t nc = X.dim(0) * X.dim(1);
    const std::size_t z = X.size() / nc;
    Tensor y({X.dim(0), X.dim(1)});
    for (std::size_t r = 0; r < nc; ++r) {
        double s = 0;
        for (std::size_t k = 0; k < z; ++k) {
            s += X[r * z + k];
        }
        y[r] = s / static_cast<double>(z);
    }
    return t.record(std::move(y), {x}, [x, nc, z](Tape& tp, const Tensor& g) {
        auto& gx = tp.grad_buffer(x);
        for (std::size_t r = 0; r < nc; ++r) {
            const double v = g[r] / static_cast<double>(z);
            for (std::size_t k = 0; k < z; ++k) {
                gx[r * z + k] += v;
            }
        }
    });
}

Var linear(Tape& t, Var x, Var w, Var b) {
    const auto& X = t.value(x);
    const auto& W = t.value(w);
    require(X.rank() == 2 && W.rank() == 2 && W.dim(1) == X.dim(1), ErrorKind::shape_mismatch,
            "linear expects x [N, in] and w [out, in]");
    const std::size_t n = X.dim(0), in = X.dim(1), out = W.dim(0);
    Tensor y({n, out});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < out; ++o) {
            double s = b.valid() ? t.value(b)[o] : 0.0;
            for (std::size_t k = 0; k < in; ++k) {
                s += W[o * in + k] * X[r * in + k];
            }
            y[r * out + o] = s;
        }
    }
    return t.record(std::move(y), {x, w, b}, [x, w, b, n, in, out](Tape& tp, const Tensor& g) {
        const auto& X = tp.value(x);
        const auto& W = tp.value(w);
        if (tp.needs_grad(x)) {
            auto& gx = tp.grad_buffer(x);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t o = 0; o < out; ++o) {
                    for (std::size_t k = 0; k < in; ++k) {
                        gx[r * in + k] += W[o * in + k] * g[r * out + o];
                    }
                }
            }
        }
        if (tp.needs_grad(w)) {
            auto& gw = tp.grad_buffer(w);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t o = 0; o < out; ++o) {
                    for (std::size_t k = 0; k < in; ++k) {
                        gw[o * in + k] += X[r * in + k] * g[r * out + o];
                    }
                }
            }
        }
        if (b.valid() && tp.needs_grad(b)) {
            auto& gb = tp.grad_buffer(b);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t o = 0; o < out; ++o) {
                    gb[o] += g[r * out + o];
                }
            }
        }
    });
}

Var softmax_cross_entropy(Tape& t, Var logits, std::span<const int> labels) {
    const auto& L = t.value(logits);
    require(L.rank() == 2 && L.dim(0) == labels.size(), ErrorKind::shape_mismatch,
            "cross-entropy expects [N, K] logits and N labels");
    const std::size_t n = L.dim(0), k = L.dim(1);
    Tensor probs({n, k});
    double loss = 0;
    for (std::size_t r = 0; r < n; ++r) {
        require(labels[r] >= 0 && static_cast<std::size_t>(labels[r]) < k, ErrorKind::out_of_bounds,
                "label out of range");
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            m = std::max(m, L[r * k + c]);
        }
        double z = 0;
        for (std::size_t c = 0; c < k; ++c) {
            z += std::exp(L[r * k + c] - m);
        }
        for (std::size_t c = 0; c < k; ++c) {
            probs[r * k + c] = std::exp(L[r * k + c] - m) / z;
        }
        loss -= L[r * k + static_cast<std::size_t>(labels[r])] - m - std::log(z);
    }
    loss /= static_cast<double>(n);
    std::vector<int> lab(labels.begin(), labels.end());
    return t.record(Tensor::scalar(loss), {logits},
                    [logits, probs = std::move(probs), lab = std::move(lab), n, k](Tape& tp, const Tensor& g) {
                        auto& gl = tp.grad_buffer(logits);
                        const double s = g[0] / static_cast<double>(n);
                        for (std::size_t r = 0; r < n; ++r) {
                            for (std::size_t c = 0; c < k; ++c) {
                                const double y = static_cast<std::size_t>(lab[r]) == c ? 1.0 : 0.0;
                                gl[r * k + c] += s * (probs[r * k + c] - y);
                            }
                        }
                    });
}

Var add(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "add");
    Tensor y = t.value(a);
    const auto& B = t.value(b);
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] += B[k];
    }
    return t.record(std::move(y), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        for (Var v : {a, b}) {
            if (tp.needs_grad(v)) {
                auto& gv = tp.grad_buffer(v);
                for (std::size_t k = 0; k < g.size(); ++k) {
                    gv[k] += g[k];
                }
            }
        }
    });
}

Var mul(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "mul");
    Tensor y = t.value(a);
    const auto& B = t.value(b);
    for (std::size_t k = 0; k < y.size(); ++k) {
        y[k] *= B[k];
    }
    return t.record(std::move(y), {a, b}, [a, b](Tape& tp, const Tensor& g) {
        if (tp.needs_grad(a)) {
            auto& ga = tp.grad_buffer(a);
            const auto& B = tp.value(b);
            for (std::size_t k = 0; k < g.size(); ++k) {
                ga[k] += g[k] * B[k];
            }
        }
        if (tp.needs_grad(b)) {
            auto& gb = tp.grad_buffer(b);
            const auto& A = tp.value(a);
            for (std::size_t k = 0; k < g.size(); ++k) {
                gb[k] += g[k] * A[k];
            }
        }
    });
}

Var scale(Tape& t, Var a, double s) {
    Tensor y = t.value(a);
    for (auto& v : y.values()) {
        v *= s;
    }
    return t.record(std::move(y), {a}, [a, s](Tape& tp, const Tensor& g) {
        auto& ga = tp.grad_buffer(a);
        for (std::size_t k = 0; k < g.size(); ++k) {
            ga[k] += s * g[k];
        }
    });
}

Var sum(Tape& t, Var a) {
    return t.record(Tensor::scalar(t.value(a).sum()), {a}, [a](Tape& tp, const Tensor& g) {
        auto& ga = tp.grad_buffer(a);
        for (auto& v : ga.values()) {
            v += g[0];
        }
    });
}

Var narrow_channels(Tape& t, Var x, std::size_t count) {
    const auto& X = t.value(x);
    require(X.rank() >= 2 && count >= 1 && count <= X.dim(1), ErrorKind::shape_mismatch,
            "narrow_channels: count must lie in [1, C]");
    const std::size_t n = X.dim(0), c = X.dim(1), z = X.size() / (n * c);
    if (count == c) {
        return x;
    }
    Shape shape = X.shape();
    shape[1] = count;
    Tensor y(shape);
    for (std::size_t r = 0; r < n; ++r) {
        std::copy_n(X.data() + r * c * z, count * z, y.data() + r * count * z);
    }
    return t.record(std::move(y), {x}, [x, n, c, z, count](Tape& tp, const Tensor& g) {
        auto& gx = tp.grad_buffer(x);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < count * z; ++k) {
                gx[r * c * z + k] += g[r * count * z + k];
            }
        }
    });
}

Var column_sum(Tape& t, Var x, std::size_t k) {
    const auto& X = t.value(x);
    require(X.rank() == 2 && k < X.dim(1), ErrorKind::shape_mismatch, "column_sum expects [N, K] and k < K");
    const std::size_t n = X.dim(0), cols = X.dim(1);
    double s = 0;
    for (std::size_t r = 0; r < n; ++r) {
        s += X[r * cols + k];
    }
    return t.record(Tensor::scalar(s), {x}, [x, n, cols, k](Tape& tp, const Tensor& g) {
        auto& gx = tp.grad_buffer(x);
        for (std::size_t r = 0; r < n; ++r) {
            gx[r * cols + k] += g[0];
        }
    });
}

Var reduce_depth(Tape& t, Var x, DepthReduce mode, Var w) {
    const auto& X = t.value(x);
    require(X.rank() == 5, ErrorKind::shape_mismatch, "depth reduction expects [N, C, D, H, W]");
    const std::size_t nc = X.dim(0) * X.dim(1), d = X.dim(2), hw = X.dim(3) * X.dim(4);
    require(d >= 1, ErrorKind::shape_mismatch, "depth must be at least 1");
    if (mode == DepthReduce::conv) {
        require(w.valid() && t.value(w).size() == d, ErrorKind::shape_mismatch, "conv reducer needs a [D] kernel");
    }
    Tensor y({X.dim(0), X.dim(1), X.dim(3), X.dim(4)});
    std::vector<std::uint32_t> argmax(mode == DepthReduce::max ? nc * hw : 0);
    for (std::size_t r = 0; r < nc; ++r) {
        const double* xr = X.data() + r * d * hw;
        for (std::size_t p = 0; p < hw; ++p) {
            double acc = 0;
            if (mode == DepthReduce::max) {
                std::uint32_t best = 0;
                acc = xr[p];
                for (std::size_t z = 1; z < d; ++z) {
                    if (xr[z * hw + p] > acc) {
                        acc = xr[z * hw + p];
                        best = static_cast<std::uint32_t>(z);
                    }
                }
                argmax[r * hw + p] = best;
            } else {
                for (std::size_t z = 0; z < d; ++z) {
                    acc += xr[z * hw + p] * (mode == DepthReduce::conv ? t.value(w)[z] : 1.0);
                }
                if (mode == DepthReduce::avg) {
                    acc /= static_cast<double>(d);
                }
            }
            y[r * hw + p] = acc;
        }
    }
    return t.record(std::move(y), {x, w},
                    [x, w, mode, nc, d, hw, argmax = std::move(argmax)](Tape& tp, const Tensor& g) {
                        const auto& X = tp.value(x);
                        double* gx = tp.needs_grad(x) ? tp.grad_buffer(x).data() : nullptr;
                        double* gw = mode == DepthReduce::conv && tp.needs_grad(w) ? tp.grad_buffer(w).data()
                                                                                   : nullptr;
                        for (std::size_t r = 0; r < nc; ++r) {
                            for (std::size_t p = 0; p < hw; ++p) {
                                const double gv = g[r * hw + p];
                                if (mode == DepthReduce::max) {
                                    if (gx) {
                                        gx[(r * d + argmax[r * hw + p]) * hw + p] += gv;
                                    }
                                    continue;
                                }
                                for (std::size_t z = 0; z < d; ++z) {
                                    const std::size_t off = (r * d + z) * hw + p;
                                    if (mode == DepthReduce::avg) {
                                        if (gx) {
                                            gx[off] += gv / static_cast<double>(d);
                                        }
                                    } else {
                                        if (gx) {
                                            gx[off] += gv * tp.value(w)[z];
                                        }
                                        if (gw) {
                                            gw[z] += gv * X[off];
                                        }
                                    }
                                }
                            }
                        }
                    });
}

Var weight_by_map(Tape& t, Var x, Var m) {
    const auto& X = t.value(x);
    const auto& M = t.value(m);
    require(X.rank() >= 3 && M.rank() == X.rank() - 1 && M.dim(0) == X.dim(0) &&
                M.size() * X.dim(1) == X.size(),
            ErrorKind::shape_mismatch, "weight_by_map expects x [N, C, S...] and m [N, S...]");
    const std::size_t n = X.dim(0), c = X.dim(1), z = M.size() / n;
    Tensor y = X;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t k = 0; k < z; ++k) {
                y[(r * c + ch) * z + k] *= M[r * z + k];
            }
        }
    }
    return t.record(std::move(y), {x, m}, [x, m, n, c, z](Tape& tp, const Tensor& g) {
        const auto& X = tp.value(x);
        const auto& M = tp.value(m);
        double* gx = tp.needs_grad(x) ? tp.grad_buffer(x).data() : nullptr;
        double* gm = tp.needs_grad(m) ? tp.grad_buffer(m).data() : nullptr;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                for (std::size_t k = 0; k < z; ++k) {
                    const std::size_t off = (r * c + ch) * z + k;
                    if (gx) {
                        gx[off] += g[off] * M[r * z + k];
                    }
                    if (gm) {
                        gm[r * z + k] += g[off] * X[off];
                    }
                }
            }
        }
    });
}

CodeOrder code_order(const losses::MappingTable& table) {
    const auto i2c = table.index_to_cell();
    return CodeOrder(i2c.begin(), i2c.end());
}

CodeOrder raster_order(std::size_t cells) {
    CodeOrder o(cells);
    for (std::size_t k = 0; k < cells; ++k) {
        o[k] = static_cast<std::uint32_t>(k);
    }
    return o;
}

namespace {

losses::LinearCode gather(const double* src, const CodeOrder& order) {
    losses::LinearCode c;
    c.values.assign(order.size(), 0.0);
    c.valid.assign(order.size(), 0);
    for (std::size_t v = 0; v < order.size(); ++v) {
        if (order[v] != losses::MappingTable::kNone) {
            c.values[v] = src[order[v]];
            c.valid[v] = 1;
        }
    }
    return c;
}

void scatter_add(double* dst, const CodeOrder& order, std::span<const double> g, double s) {
    for (std::size_t v = 0; v < order.size(); ++v) {
        if (order[v] != losses::MappingTable::kNone) {
            dst[order[v]] += s * g[v];
        }
    }
}

} // namespace

Var distill_loss(Tape& t, Var teacher, Var student, const DistillSpec& spec, DistillStats* stats) {
    const auto& T = t.value(teacher);
    const auto& S = t.value(student);
    require(T.rank() >= 3 && S.rank() >= 3 && T.dim(0) == S.dim(0) && T.dim(1) == S.dim(1),
            ErrorKind::shape_mismatch, "distillation expects matching [N, C] leading axes");
    const std::size_t n = S.dim(0), c = S.dim(1);
    const std::size_t zt = T.size() / (n * c), zs = S.size() / (n * c);
    const bool aligned = spec.align_w.valid();
    const std::size_t L = spec.student_order.size();
    if (aligned) {
        require(t.value(spec.align_w).size() == L * L && t.value(spec.align_b).size() == L,
                ErrorKind::shape_mismatch, "align layer size does not match the student code");
    }

    struct Pair {
        std::size_t slot;
        losses::LinearCode student_code;
        std::vector<double> gt;
        std::vector<double> gs;
    };
    std::vector<Pair> pairs;
    double total = 0;
    std::size_t skipped = 0;
    losses::AlignLayer layer;
    if (aligned) {
        const auto& Wv = t.value(spec.align_w);
        const auto& Bv = t.value(spec.align_b);
        layer.weights.assign(Wv.values().begin(), Wv.values().end());
        layer.bias.assign(Bv.values().begin(), Bv.values().end());
    }
    for (std::size_t slot = 0; slot < n * c; ++slot) {
        const auto tc = gather(T.data() + slot * zt, spec.teacher_order);
        auto sc = gather(S.data() + slot * zs, spec.student_order);
        const auto sa = aligned ? losses::fc_align(sc, layer) : sc;
        if (l2_norm(sa.values) == 0.0 ||
            l2_norm(losses::nearest_rescale(tc, sa.length(), spec.rescale).values) == 0.0) {
            ++skipped;
            continue;
        }
        const auto r = losses::hd_loss(tc, sa, {spec.rescale});
        total += r.value;
        pairs.push_back({slot, std::move(sc), r.grad_teacher, r.grad_student});
    }
    if (stats) {
        stats->pairs += n * c;
        stats->skipped += skipped;
    }
    const double inv = 1.0 / static_cast<double>(n * c);
    return t.record(Tensor::scalar(total * inv), {teacher, student, spec.align_w, spec.align_b},
                    [teacher, student, spec, zt, zs, inv, layer = std::move(layer), pairs = std::move(pairs),
                     aligned](Tape& tp, const Tensor& g) {
                        const double s = g[0] * inv;
                        for (const auto& p : pairs) {
                            if (tp.needs_grad(teacher)) {
                                scatter_add(tp.grad_buffer(teacher).data() + p.slot * zt, spec.teacher_order, p.gt,
                                            s);
                            }
                            std::vector<double> gcode = p.gs;
                            if (aligned) {
                                const auto ag = losses::fc_align_backward(p.student_code, layer, p.gs);
                                gcode = ag.code;
                                if (tp.needs_grad(spec.align_w)) {
                                    auto& gw = tp.grad_buffer(spec.align_w);
                                    for (std::size_t k = 0; k < ag.weights.size(); ++k) {
                                        gw[k] += s * ag.weights[k];
                                    }
                                }
                                if (tp.needs_grad(spec.align_b)) {
                                    auto& gb = tp.grad_buffer(spec.align_b);
                                    for (std::size_t k = 0; k < ag.bias.size(); ++k) {
                                        gb[k] += s * ag.bias[k];
                                    }
                                }
                            }
                            if (tp.needs_grad(student)) {
                                scatter_add(tp.grad_buffer(student).data() + p.slot * zs, spec.student_order, gcode,
                                            s);
                            }
                        }
                    });
}

} // namespace hd::harness
