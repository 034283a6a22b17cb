#include "hd/tensor.hpp"

#include "hd/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hd {

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        os << (i ? "," : "") << shape[i];
    }
    os << ')';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    require(data_.size() == shape_size(shape_), ErrorKind::shape_mismatch,
            "tensor payload does not match shape " + shape_string(shape_));
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
    require(idx.size() == shape_.size(), ErrorKind::shape_mismatch, "index rank mismatch");
    std::size_t off = 0;
    std::size_t axis = 0;
    for (auto i : idx) {
        require(i < shape_[axis], ErrorKind::out_of_bounds, "tensor index out of bounds");
        off = off * shape_[axis] + i;
        ++axis;
    }
    return off;
}

double& Tensor::at(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }

double Tensor::at(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }

Tensor Tensor::reshaped(Shape shape) const {
    require(shape_size(shape) == data_.size(), ErrorKind::shape_mismatch,
            "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    return Tensor(std::move(shape), data_);
}

Tensor Tensor::slice0(std::size_t index) const {
    require(rank() >= 1 && index < shape_[0], ErrorKind::out_of_bounds, "slice index out of bounds");
    Shape inner(shape_.begin() + 1, shape_.end());
    const std::size_t n = shape_size(inner);
    std::vector<double> v(data_.begin() + static_cast<std::ptrdiff_t>(index * n),
                          data_.begin() + static_cast<std::ptrdiff_t>((index + 1) * n));
    return Tensor(std::move(inner), std::move(v));
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

double Tensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorKind::shape_mismatch, "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace hd
