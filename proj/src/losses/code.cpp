#include "hd/losses/code.hpp"

#include "hd/error.hpp"

#include <algorithm>

namespace hd::losses {

namespace {

void check_extents(const Tensor& t, const MappingTable& table, const char* what) {
    const auto ext = table.region().extents();
    bool ok = t.rank() == ext.size();
    for (std::size_t a = 0; ok && a < ext.size(); ++a) {
        ok = t.dim(a) == ext[a];
    }
    require(ok, ErrorKind::shape_mismatch,
            std::string(what) + " shape " + shape_string(t.shape()) + " does not match region " +
                table.region().to_string());
}

std::size_t rescale_factor(std::size_t source, std::size_t target) {
    require(target > 0 && source >= target && source % target == 0, ErrorKind::shape_mismatch,
            "cannot rescale a code of length " + std::to_string(source) + " to " + std::to_string(target));
    return source / target;
}

std::size_t sample_offset(std::size_t factor, RescaleMode mode) { return mode == RescaleMode::center ? factor / 2 : 0; }

} // namespace

LinearCode LinearCode::dense(std::vector<double> values) {
    LinearCode c;
    c.valid.assign(values.size(), 1);
    c.values = std::move(values);
    return c;
}

std::size_t LinearCode::valid_count() const {
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

LinearCode map_features(const Tensor& eta, const MappingTable& table) {
    check_extents(eta, table, "feature map");
    const auto i2c = table.index_to_cell();
    LinearCode c;
    c.values.assign(i2c.size(), 0.0);
    c.valid.assign(i2c.size(), 0);
    for (std::size_t v = 0; v < i2c.size(); ++v) {
        if (i2c[v] != MappingTable::kNone) {
            c.values[v] = eta[i2c[v]];
            c.valid[v] = 1;
        }
    }
    return c;
}

LinearCode map_features_weighted(const Tensor& eta, const Tensor& am, const MappingTable& table) {
    check_extents(eta, table, "feature map");
    check_extents(am, table, "activation map");
    auto c = map_features(eta, table);
    const auto i2c = table.index_to_cell();
    for (std::size_t v = 0; v < i2c.size(); ++v) {
        if (i2c[v] != MappingTable::kNone) {
            c.values[v] *= am[i2c[v]];
        }
    }
    return c;
}

Tensor scatter_code(std::span<const double> g, const MappingTable& table) {
    const auto i2c = table.index_to_cell();
    require(g.size() == i2c.size(), ErrorKind::shape_mismatch, "gradient length does not match code length");
    Shape shape(table.region().extents().begin(), table.region().extents().end());
    Tensor out(shape);
    for (std::size_t v = 0; v < i2c.size(); ++v) {
        if (i2c[v] != MappingTable::kNone) {
            out[i2c[v]] = g[v];
        }
    }
    return out;
}

RescaleMode parse_rescale_mode(std::string_view text) {
    if (text == "left") {
        return RescaleMode::left;
    }
    if (text == "center") {
        return RescaleMode::center;
    }
    fail(ErrorKind::invalid_argument, "unknown rescale mode '" + std::string(text) + "'");
}

const char* to_string(RescaleMode mode) { return mode == RescaleMode::left ? "left" : "center"; }

LinearCode nearest_rescale(const LinearCode& code, std::size_t target_length, RescaleMode mode) {
    const std::size_t factor = rescale_factor(code.length(), target_length);
    const std::size_t off = sample_offset(factor, mode);
    LinearCode out;
    out.values.resize(target_length);
    out.valid.resize(target_length);
    for (std::size_t k = 0; k < target_length; ++k) {
        out.values[k] = code.values[k * factor + off];
        out.valid[k] = code.valid[k * factor + off];
    }
    return out;
}

std::vector<double> rescale_adjoint(std::span<const double> g, std::size_t source_length, RescaleMode mode) {
    const std::size_t factor = rescale_factor(source_length, g.size());
    const std::size_t off = sample_offset(factor, mode);
    std::vector<double> out(source_length, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        out[k * factor + off] = g[k];
    }
    return out;
}

} // namespace hd::losses
