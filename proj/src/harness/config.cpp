#include "hd/harness/config.hpp"

#include "hd/error.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace hd::harness {

using nlohmann::json;

namespace {

struct KindName {
    LossKind kind;
    const char* name;
};
constexpr KindName kKinds[] = {{LossKind::none, "none"}, {LossKind::hd, "hd"},   {LossKind::vhd, "vhd"},
                               {LossKind::avg, "avg"},   {LossKind::max, "max"}, {LossKind::conv, "conv"}};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front()) {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

[[noreturn]] void bad(std::string_view key, const std::string& why) {
    fail(ErrorKind::config, std::string(key) + ": " + why);
}

double to_double(std::string_view key, std::string_view v) {
    const std::string s(v);
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(s, &used);
    } catch (const std::exception&) {
        bad(key, "expected a number, got '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(d)) {
        bad(key, "expected a number, got '" + s + "'");
    }
    return d;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    bad(key, "expected true or false, got '" + std::string(v) + "'");
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        bad(key, "expected a non-negative integer, got '" + std::string(v) + "'");
    }
    return out;
}

} // namespace

LossKind parse_loss_kind(std::string_view text) {
    for (const auto& k : kKinds) {
        if (text == k.name) {
            return k.kind;
        }
    }
    fail(ErrorKind::config, "loss_kind: unknown kind '" + std::string(text) + "'");
}

const char* to_string(LossKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) {
            return k.name;
        }
    }
    return "unknown";
}

AlignSide parse_align_side(std::string_view text) {
    if (text == "none") {
        return AlignSide::none;
    }
    if (text == "student") {
        return AlignSide::student;
    }
    fail(ErrorKind::config, "align: expected none or student, got '" + std::string(text) + "'");
}

const char* to_string(AlignSide side) { return side == AlignSide::student ? "student" : "none"; }

void HarnessConfig::validate() const {
    if (!(alpha >= 0) || !std::isfinite(alpha)) {
        bad("alpha", "must be finite and non-negative");
    }
    if (!(theta > 0 && theta < 1)) {
        bad("theta", "must lie in (0, 1)");
    }
    if (distill_layer != 1 && distill_layer != 2) {
        bad("distill_layer", "must be 1 or 2");
    }
    if (channels == 0 || channels > layer_width()) {
        bad("channels", "must lie in [1, " + std::to_string(layer_width()) + "]");
    }
    if (!(lr > 0) || !std::isfinite(lr)) {
        bad("lr", "must be positive");
    }
    if (!(teacher_lr > 0) || !std::isfinite(teacher_lr)) {
        bad("teacher_lr", "must be positive");
    }
    if (batch == 0) {
        bad("batch", "must be positive");
    }
    if (teacher_depth_stride < 1 || teacher_depth_stride > 8) {
        bad("teacher_depth_stride", "must lie in [1, 8]");
    }
    if (width1 == 0 || width2 == 0) {
        bad(width1 == 0 ? "width1" : "width2", "must be positive");
    }
    data.validate();
}

void apply_setting(TrainPlan& plan, std::string_view key, std::string_view raw) {
    auto& c = plan.config;
    const std::string value = trim(raw);
    if (key == "alpha") {
        c.alpha = to_double(key, value);
    } else if (key == "theta") {
        c.theta = to_double(key, value);
    } else if (key == "distill_layer") {
        c.distill_layer = static_cast<int>(to_uint(key, value));
    } else if (key == "channels") {
        c.channels = to_uint(key, value);
    } else if (key == "lr") {
        c.lr = to_double(key, value);
    } else if (key == "epochs") {
        c.epochs = to_uint(key, value);
    } else if (key == "batch") {
        c.batch = to_uint(key, value);
    } else if (key == "seed") {
        c.seed = to_uint(key, value);
    } else if (key == "loss_kind") {
        plan.arms.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            plan.arms.push_back(parse_loss_kind(trim(item)));
        }
        if (plan.arms.empty()) {
            bad(key, "needs at least one kind");
        }
        c.loss_kind = plan.arms.front();
    } else if (key == "rescale") {
        try {
            c.rescale = losses::parse_rescale_mode(value);
        } catch (const Error& e) {
            bad(key, e.what());
        }
    } else if (key == "align") {
        c.align = parse_align_side(value);
    } else if (key == "teacher_lr") {
        c.teacher_lr = to_double(key, value);
    } else if (key == "teacher_epochs") {
        c.teacher_epochs = to_uint(key, value);
    } else if (key == "teacher_depth_stride") {
        c.teacher_depth_stride = static_cast<int>(to_uint(key, value));
    } else if (key == "swap_teacher_axes") {
        c.swap_teacher_axes = to_bool(key, value);
    } else if (key == "head_shift") {
        c.head_shift = to_double(key, value);
    } else if (key == "width1") {
        c.width1 = to_uint(key, value);
    } else if (key == "width2") {
        c.width2 = to_uint(key, value);
    } else if (key == "samples") {
        c.data.samples = to_uint(key, value);
    } else if (key == "side") {
        c.data.side = static_cast<std::uint32_t>(to_uint(key, value));
    } else if (key == "amplitude") {
        c.data.amplitude = to_double(key, value);
    } else if (key == "thickness") {
        c.data.thickness = static_cast<std::uint32_t>(to_uint(key, value));
    } else if (key == "noise") {
        c.data.noise = to_double(key, value);
    } else if (key == "jitter") {
        c.data.jitter = static_cast<std::uint32_t>(to_uint(key, value));
    } else if (key == "depth_extent") {
        c.data.depth_extent = static_cast<std::uint32_t>(to_uint(key, value));
    } else if (key == "clutter") {
        c.data.clutter = static_cast<std::uint32_t>(to_uint(key, value));
    } else if (key == "test_fraction") {
        c.data.test_fraction = to_double(key, value);
    } else if (key == "random_slice") {
        c.data.random_slice = to_bool(key, value);
    } else {
        bad(key, "unknown key");
    }
}

namespace {

void finish(TrainPlan& plan) {
    if (plan.arms.empty()) {
        plan.arms.push_back(plan.config.loss_kind);
    }
    plan.config.validate();
}

} // namespace

TrainPlan plan_from_json(const json& doc) {
    if (!doc.is_object()) {
        fail(ErrorKind::config, "config: expected a JSON object");
    }
    TrainPlan plan;
    for (const auto& [key, v] : doc.items()) {
        std::string text;
        if (v.is_string()) {
            text = v.get<std::string>();
        } else if (v.is_array()) {
            for (const auto& item : v) {
                if (!item.is_string()) {
                    bad(key, "list items must be strings");
                }
                text += (text.empty() ? "" : ",") + item.get<std::string>();
            }
        } else if (v.is_boolean()) {
            text = v.get<bool>() ? "true" : "false";
        } else if (v.is_number_unsigned() || v.is_number_integer()) {
            text = v.dump();
        } else if (v.is_number()) {
            std::ostringstream os;
            os.precision(17);
            os << v.get<double>();
            text = os.str();
        } else {
            bad(key, "unsupported value " + v.dump());
        }
        apply_setting(plan, key, text);
    }
    finish(plan);
    return plan;
}

TrainPlan parse_plan(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::exception& e) {
            fail(ErrorKind::config, std::string("config: malformed JSON: ") + e.what());
        }
        return plan_from_json(doc);
    }
    TrainPlan plan;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty() || body.front() == '[') {
            continue;
        }
        const auto sep = body.find_first_of("=:");
        if (sep == std::string::npos) {
            fail(ErrorKind::config, "line " + std::to_string(lineno) + ": expected key = value");
        }
        apply_setting(plan, trim(body.substr(0, sep)), body.substr(sep + 1));
    }
    finish(plan);
    return plan;
}

void apply_seed_override(HarnessConfig& config, const char* text) {
    if (text != nullptr && *text != '\0') {
        config.seed = to_uint("HD_SEED", trim(text));
    }
}

json to_json(const HarnessConfig& c) {
    return {{"alpha", c.alpha},
            {"theta", c.theta},
            {"distill_layer", c.distill_layer},
            {"channels", c.channels},
            {"lr", c.lr},
            {"epochs", c.epochs},
            {"batch", c.batch},
            {"seed", c.seed},
            {"loss_kind", to_string(c.loss_kind)},
            {"rescale", losses::to_string(c.rescale)},
            {"align", to_string(c.align)},
            {"teacher_lr", c.teacher_lr},
            {"teacher_epochs", c.teacher_epochs},
            {"teacher_depth_stride", c.teacher_depth_stride},
            {"swap_teacher_axes", c.swap_teacher_axes},
            {"head_shift", c.head_shift},
            {"width1", c.width1},
            {"width2", c.width2},
            {"samples", c.data.samples},
            {"side", c.data.side},
            {"amplitude", c.data.amplitude},
            {"thickness", c.data.thickness},
            {"noise", c.data.noise},
            {"jitter", c.data.jitter},
            {"depth_extent", c.data.depth_extent},
            {"clutter", c.data.clutter},
            {"test_fraction", c.data.test_fraction},
            {"random_slice", c.data.random_slice}};
}

} // namespace hd::harness
