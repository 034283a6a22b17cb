#pragma once

#include "hd/harness/data.hpp"
#include "hd/losses/code.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hd::harness {

enum class LossKind : std::uint8_t { none, hd, vhd, avg, max, conv };

LossKind parse_loss_kind(std::string_view text);
const char* to_string(LossKind kind);

/// Where the optional align layer sits.
enum class AlignSide : std::uint8_t { none, student };

AlignSide parse_align_side(std::string_view text);
const char* to_string(AlignSide side);

struct HarnessConfig {
    /// Distillation weight.
    double alpha = 1.0;
    /// Activation threshold, reported for vhd runs.
    double theta = 0.5;
    /// 1 or 2: which block output is distilled.
    int distill_layer = 1;
    /// Leading channels of that layer used for distillation.
    std::size_t channels = 8;
    double lr = 0.1;
    std::size_t epochs = 60;
    std::size_t batch = 16;
    std::uint64_t seed = 1;
    LossKind loss_kind = LossKind::none;
    losses::RescaleMode rescale = losses::RescaleMode::left;
    AlignSide align = AlignSide::none;

    double teacher_lr = 0.3;
    std::size_t teacher_epochs = 60;
    /// Shared head-weight shift at init for both networks.
    double head_shift = 1.0;
    std::size_t width1 = 8;
    std::size_t width2 = 16;
    /// Depth stride of the teacher's first block.
    int teacher_depth_stride = 4;
    /// Walk the teacher's in-plane axes as (j, i) when laying out its code.
    bool swap_teacher_axes = true;

    SynthConfig data;

    /// Throws config naming the offending key.
    void validate() const;
    std::size_t layer_width() const { return distill_layer == 1 ? width1 : width2; }
};

/// A config plus the student arms to run against one teacher.
struct TrainPlan {
    HarnessConfig config;
    std::vector<LossKind> arms;
};

/// Sets one key from its text form; loss_kind accepts a comma list, which
/// fills the plan's arms. Throws config naming the key.
void apply_setting(TrainPlan& plan, std::string_view key, std::string_view value);

/// JSON object of keys, or lines of `key = value` / `key: value` with `#`
/// comments. The format is picked from the first non-blank character.
TrainPlan parse_plan(std::string_view text);
TrainPlan plan_from_json(const nlohmann::json& doc);

/// Replaces the seed when HD_SEED-style text is present; rejects non-integers.
void apply_seed_override(HarnessConfig& config, const char* text);

nlohmann::json to_json(const HarnessConfig& config);

} // namespace hd::harness
