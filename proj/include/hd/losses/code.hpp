#pragma once

#include "hd/curve/mapping.hpp"
#include "hd/tensor.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace hd::losses {

using curve::MappingTable;

/// 1D representation of a feature map along a curve. Invalid (padding)
/// slots hold 0.
struct LinearCode {
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    static LinearCode dense(std::vector<double> values);

    std::size_t length() const { return values.size(); }
    std::size_t valid_count() const;

    friend bool operator==(const LinearCode&, const LinearCode&) = default;
};

/// code[v] = eta(cell) for every mapped cell. eta's shape must equal the
/// table's region extents.
LinearCode map_features(const Tensor& eta, const MappingTable& table);

/// code[v] = eta(cell) * am(cell).
LinearCode map_features_weighted(const Tensor& eta, const Tensor& am, const MappingTable& table);

/// Adjoint of map_features: a tensor shaped like the region holding g[v] at
/// each mapped cell and 0 elsewhere.
Tensor scatter_code(std::span<const double> g, const MappingTable& table);

enum class RescaleMode : std::uint8_t {
    /// output[k] = input[k * factor]
    left,
    /// output[k] = input[k * factor + factor / 2]
    center,
};

RescaleMode parse_rescale_mode(std::string_view text);
const char* to_string(RescaleMode mode);

/// Nearest down-sampling by an integer factor; validity follows the sampled slot.
LinearCode nearest_rescale(const LinearCode& code, std::size_t target_length, RescaleMode mode = RescaleMode::left);

/// Adjoint of nearest_rescale: routes g[k] back to the sampled source slot.
std::vector<double> rescale_adjoint(std::span<const double> g, std::size_t source_length,
                                    RescaleMode mode = RescaleMode::left);

} // namespace hd::losses
