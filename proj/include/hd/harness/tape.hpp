#pragma once

#include "hd/losses/code.hpp"
#include "hd/tensor.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace hd::harness {

/// Handle to a tape node.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Minimal reverse-mode recorder. Every op appends a node holding its value
/// and a closure that pushes the node's gradient to its inputs. Nodes are
/// recorded in topological order, so backward is one reverse sweep.
class Tape {
public:
    using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

    /// Input that never receives a gradient.
    Var constant(Tensor value);
    /// Input whose gradient is kept.
    Var param(Tensor value);
    /// Records an op result; it needs a gradient iff any input does.
    Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);

    const Tensor& value(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).value; }
    bool needs_grad(Var v) const { return nodes_.at(static_cast<std::size_t>(v.id)).needs_grad; }
    /// Gradient after backward(); zeros if nothing reached the node.
    const Tensor& grad(Var v);
    /// Accumulation buffer used by backward closures.
    Tensor& grad_buffer(Var v);

    /// Seeds d(root)/d(root) = 1 for a scalar (size-1) root.
    void backward(Var root);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        bool has_grad = false;
        Backward backward;
    };
    std::vector<Node> nodes_;
};

/// Spatial convolution geometry, shared by the 2D and 3D ops.
struct ConvGeom {
    int stride = 1;
    int pad = 0;
    /// Stride along D for 3D ops; 0 reuses `stride`.
    int depth_stride = 0;
};

// x: [N, Cin, H, W], w: [Cout, Cin, k, k], b: [Cout] -> [N, Cout, H', W'].
Var conv2d(Tape& t, Var x, Var w, Var b, ConvGeom g = {});
// x: [N, Cin, D, H, W], w: [Cout, Cin, k, k, k], b: [Cout].
Var conv3d(Tape& t, Var x, Var w, Var b, ConvGeom g = {});
Var relu(Tape& t, Var x);
/// [N, C, spatial...] -> [N, C].
Var global_avg_pool(Tape& t, Var x);
/// x: [N, in], w: [out, in], b: [out] -> [N, out].
Var linear(Tape& t, Var x, Var w, Var b);
/// Mean softmax cross-entropy of logits [N, K] against integer labels.
Var softmax_cross_entropy(Tape& t, Var logits, std::span<const int> labels);
Var add(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var sum(Tape& t, Var a);
/// First `count` channels of [N, C, spatial...].
Var narrow_channels(Tape& t, Var x, std::size_t count);
/// Picks column k of a [N, K] tensor and sums over N.
Var column_sum(Tape& t, Var x, std::size_t k);

enum class DepthReduce : std::uint8_t { avg, max, conv };

/// [N, C, D, H, W] -> [N, C, H, W] along D. For conv, w is a [D] kernel
/// shared by all channels; pass an invalid Var otherwise.
Var reduce_depth(Tape& t, Var x, DepthReduce mode, Var w = {});

/// x: [N, C, spatial...] times a per-sample map m: [N, spatial...].
Var weight_by_map(Tape& t, Var x, Var m);

/// Slot order of a code: order[v] is the row-major spatial offset sampled
/// into slot v, or kNone for a padding slot.
using CodeOrder = std::vector<std::uint32_t>;
CodeOrder code_order(const losses::MappingTable& table);
CodeOrder raster_order(std::size_t cells);

struct DistillSpec {
    CodeOrder teacher_order;
    CodeOrder student_order;
    losses::RescaleMode rescale = losses::RescaleMode::left;
    /// Optional length-preserving align layer on the student code:
    /// weights [L, L], bias [L].
    Var align_w;
    Var align_b;
};

struct DistillStats {
    std::size_t pairs = 0;
    std::size_t skipped = 0;
};

/// Mean over samples and channels of the normalised L1 code distance.
/// teacher: [N, C, teacher spatial...], student: [N, C, student spatial...].
/// Channel pairs whose codes have zero norm are skipped and counted.
Var distill_loss(Tape& t, Var teacher, Var student, const DistillSpec& spec, DistillStats* stats = nullptr);

} // namespace hd::harness
