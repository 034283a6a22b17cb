#include "hd/cli/cli.hpp"

#include "hd/activation/activation.hpp"
#include "hd/curve/mapping.hpp"
#include "hd/curve/mapping_io.hpp"
#include "hd/curve/svg.hpp"
#include "hd/error.hpp"
#include "hd/harness/metrics.hpp"
#include "hd/harness/train.hpp"
#include "hd/io/tensor_file.hpp"
#include "hd/losses/loss.hpp"
#include "hd/vh/vh_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

namespace hd::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Common {
    bool pretty = false;
};

void emit(std::ostream& out, const Common& common, const json& doc, const std::string& text) {
    if (common.pretty) {
        out << text;
        if (!text.empty() && text.back() != '\n') {
            out << '\n';
        }
    } else {
        out << doc.dump() << '\n';
    }
}

bool wants_json(const std::string& path, const std::string& format) {
    if (format == "json") {
        return true;
    }
    if (format == "hdmt") {
        return false;
    }
    return fs::path(path).extension() == ".json";
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    require(static_cast<bool>(os), ErrorKind::io, "cannot write " + path);
    return os;
}

void finish(std::ofstream& os, const std::string& path) {
    os.flush();
    require(static_cast<bool>(os), ErrorKind::io, "write failed for " + path);
}

curve::Region region_or_full(const curve::CurveSpec& spec, const std::vector<std::uint32_t>& extents) {
    if (extents.empty()) {
        return curve::Region::full(spec);
    }
    require(static_cast<int>(extents.size()) == spec.n, ErrorKind::invalid_region,
            "--region needs " + std::to_string(spec.n) + " extents");
    curve::Region region(extents);
    region.check_fits(spec);
    return region;
}

std::string extents_text(std::span<const std::uint32_t> e) {
    std::string s;
    for (std::size_t a = 0; a < e.size(); ++a) {
        s += (a ? "x" : "") + std::to_string(e[a]);
    }
    return s;
}

// gen-curve

struct GenCurve {
    int n = 2;
    int p = 1;
    std::vector<std::uint32_t> region;
    std::string layout = "padded";
    std::string out;
    std::string format = "auto";
    std::string svg;
};

int gen_curve(const GenCurve& o, const Common& common, std::ostream& out) {
    const curve::CurveSpec spec{o.n, o.p};
    spec.validate();
    require(o.svg.empty() || spec.n == 2, ErrorKind::unsupported_dimension, "SVG output requires n=2");
    const auto region = region_or_full(spec, o.region);
    const auto table = curve::build_mapping(spec, region, curve::parse_layout(o.layout));
    json summary = {{"command", "gen-curve"},
                    {"n", spec.n},
                    {"p", spec.p},
                    {"region", std::vector<std::uint32_t>(region.extents().begin(), region.extents().end())},
                    {"layout", curve::to_string(table.layout())},
                    {"entries", table.entry_count()},
                    {"code_length", table.code_length()}};
    if (!o.svg.empty()) {
        auto os = open_out(o.svg, false);
        os << curve::render_svg(table);
        finish(os, o.svg);
        summary["svg"] = o.svg;
    }
    if (o.out.empty()) {
        const json doc = curve::mapping_to_json(table);
        emit(out, common, doc, common.pretty ? doc.dump(2) : "");
        return exit_ok;
    }
    if (wants_json(o.out, o.format)) {
        auto os = open_out(o.out, false);
        os << curve::mapping_to_json(table).dump() << '\n';
        finish(os, o.out);
    } else {
        auto os = open_out(o.out, true);
        curve::write_mapping_binary(os, table);
        finish(os, o.out);
    }
    summary["out"] = o.out;
    std::ostringstream text;
    text << "gen-curve n=" << spec.n << " p=" << spec.p << " region=" << extents_text(region.extents())
         << " layout=" << curve::to_string(table.layout()) << " entries=" << table.entry_count()
         << " code_length=" << table.code_length() << " -> " << o.out;
    emit(out, common, summary, text.str());
    return exit_ok;
}

// gen-vh

struct GenVh {
    int n = 2;
    int p = 1;
    std::string mask;
    std::vector<std::uint32_t> region;
    std::string out;
    std::string format = "auto";
};

int gen_vh(const GenVh& o, const Common& common, std::ostream& out) {
    const curve::CurveSpec spec{o.n, o.p};
    spec.validate();
    const auto mask = vh::ActivationMask::from_tensor(io::load_tensor(o.mask).tensor);
    require(mask.region().dims() == spec.n, ErrorKind::shape_mismatch,
            "mask has rank " + std::to_string(mask.region().dims()) + ", expected " + std::to_string(spec.n));
    const auto region = o.region.empty() ? mask.region() : region_or_full(spec, o.region);
    require(region == mask.region(), ErrorKind::shape_mismatch,
            "mask extents " + mask.region().to_string() + " do not match region " + region.to_string());
    region.check_fits(spec);
    const auto table = vh::vh_mapping(spec, region, mask);
    if (o.out.empty()) {
        const json doc = vh::vh_to_json(table);
        emit(out, common, doc, common.pretty ? doc.dump(2) : "");
        return exit_ok;
    }
    if (wants_json(o.out, o.format)) {
        auto os = open_out(o.out, false);
        os << vh::vh_to_json(table).dump() << '\n';
        finish(os, o.out);
    } else {
        auto os = open_out(o.out, true);
        vh::write_vh_binary(os, table);
        finish(os, o.out);
    }
    const json summary = {{"command", "gen-vh"},
                          {"n", spec.n},
                          {"p", spec.p},
                          {"on_curve", table.on_curve_count()},
                          {"representatives", table.skipped_count()},
                          {"active_fraction", mask.active_fraction()},
                          {"out", o.out}};
    std::ostringstream text;
    text << "gen-vh n=" << spec.n << " p=" << spec.p << " on_curve=" << table.on_curve_count()
         << " representatives=" << table.skipped_count() << " -> " << o.out;
    emit(out, common, summary, text.str());
    return exit_ok;
}

// loss

struct LossCmd {
    std::string teacher;
    std::string student;
    std::string kind = "hd";
    std::string teacher_am;
    std::string student_am;
    double theta = activation::kDefaultThreshold;
    std::string rescale = "left";
    bool grads = false;
};

/// Drops a unit depth axis so a one-slice teacher is compared as a plane.
Tensor squeeze_depth(const Tensor& t, std::size_t depth_axis) {
    if (t.rank() <= depth_axis || t.dim(depth_axis) != 1) {
        return t;
    }
    Shape s = t.shape();
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(depth_axis));
    return t.reshaped(std::move(s));
}

Tensor spatial_of(const Tensor& t, bool stacked) {
    if (!stacked) {
        return t;
    }
    Shape s(t.shape().begin() + 1, t.shape().end());
    return Tensor(std::move(s));
}

double norm(const Tensor& t) { return l2_norm(t.values()); }

int loss_cmd(const LossCmd& o, const Common& common, std::ostream& out) {
    const bool weighted = o.kind == "vhd";
    Tensor eta_t = io::load_tensor(o.teacher).tensor;
    Tensor eta_s = io::load_tensor(o.student).tensor;
    require(eta_s.rank() == 2 || eta_s.rank() == 3, ErrorKind::shape_mismatch,
            "student tensor must be [W, H] or [C, W, H]");
    const bool stacked = eta_s.rank() == 3;
    require(eta_t.rank() == eta_s.rank() + 1, ErrorKind::shape_mismatch,
            stacked ? "teacher tensor must be [C, D, W, H] for a stacked student"
                    : "teacher tensor must be [D, W, H]");
    eta_t = squeeze_depth(eta_t, stacked ? 1 : 0);

    const auto region_of = [](const Tensor& spatial) {
        std::vector<std::uint32_t> e;
        for (auto d : spatial.shape()) {
            e.push_back(static_cast<std::uint32_t>(d));
        }
        return curve::Region(std::move(e));
    };
    const Tensor space_t = spatial_of(eta_t, stacked), space_s = spatial_of(eta_s, stacked);
    const auto table_t = curve::build_mapping(region_of(space_t), curve::Layout::compacted);
    const auto table_s = curve::build_mapping(region_of(space_s), curve::Layout::compacted);
    const losses::LossOptions opts{losses::parse_rescale_mode(o.rescale)};

    json doc = {{"command", "loss"},
                {"kind", o.kind},
                {"rescale", losses::to_string(opts.rescale)},
                {"teacher_shape", eta_t.shape()},
                {"student_shape", eta_s.shape()}};
    losses::LossReport r;
    if (weighted) {
        require(!o.teacher_am.empty() && !o.student_am.empty(), ErrorKind::config,
                "--teacher-am and --student-am are required for --kind vhd");
        const Tensor am_t = squeeze_depth(io::load_tensor(o.teacher_am).tensor, 0);
        const Tensor am_s = io::load_tensor(o.student_am).tensor;
        require(am_t.shape() == space_t.shape() && am_s.shape() == space_s.shape(), ErrorKind::shape_mismatch,
                "activation maps must match the spatial extents of their features");
        r = stacked ? losses::vhd_loss_stacked(eta_t, am_t, table_t, eta_s, am_s, table_s, opts)
                    : losses::vhd_loss(eta_t, am_t, table_t, eta_s, am_s, table_s, opts);
        doc["theta"] = o.theta;
        doc["teacher_active_fraction"] = activation::activation_mask(am_t, o.theta).active_fraction();
        doc["student_active_fraction"] = activation::activation_mask(am_s, o.theta).active_fraction();
    } else {
        r = stacked ? losses::hd_loss_stacked(eta_t, table_t, eta_s, table_s, opts)
                    : losses::hd_loss(eta_t, table_t, eta_s, table_s, opts);
    }
    doc["loss"] = r.value;
    std::ostringstream text;
    text << std::setprecision(17) << o.kind << " loss " << r.value;
    if (o.grads) {
        json g = {{"student", norm(r.grad_student)}, {"teacher", norm(*r.grad_teacher)}};
        text << "\n|grad student| " << norm(r.grad_student) << "\n|grad teacher| " << norm(*r.grad_teacher);
        if (weighted) {
            g["am_student"] = norm(*r.grad_am_student);
            g["am_teacher"] = norm(*r.grad_am_teacher);
        }
        doc["grad_norms"] = g;
    }
    emit(out, common, doc, text.str());
    return exit_ok;
}

// train

struct TrainCmd {
    std::string config;
    std::vector<std::string> set;
};

int train_cmd(const TrainCmd& o, const Common& common, std::ostream& out) {
    harness::TrainPlan plan;
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        require(static_cast<bool>(in), ErrorKind::config, "config: cannot read " + o.config);
        std::ostringstream text;
        text << in.rdbuf();
        plan = harness::parse_plan(text.str());
    }
    for (const auto& kv : o.set) {
        const auto eq = kv.find('=');
        require(eq != std::string::npos && eq > 0, ErrorKind::config, "--set expects key=value, got '" + kv + "'");
        harness::apply_setting(plan, kv.substr(0, eq), kv.substr(eq + 1));
    }
    harness::apply_seed_override(plan.config, std::getenv("HD_SEED"));
    plan.config.validate();
    if (plan.arms.empty()) {
        plan.arms.push_back(plan.config.loss_kind);
    }

    const auto data = harness::make_synthetic(plan.config.data, plan.config.seed);
    const auto teacher = harness::train_teacher(data, plan.config);
    std::vector<harness::RunReport> reports{teacher.report};
    for (auto arm : plan.arms) {
        auto cfg = plan.config;
        cfg.loss_kind = arm;
        reports.push_back(harness::train_student(data, &teacher, cfg));
    }
    json doc = {{"command", "train"}, {"reports", json::array()}};
    for (const auto& r : reports) {
        doc["reports"].push_back(harness::to_json(r));
    }
    emit(out, common, doc, harness::to_text(reports));
    return exit_ok;
}

// bench

struct BenchCmd {
    int n = 3;
    std::vector<std::uint32_t> sides{2, 4, 8, 16, 32, 64, 128, 256};
    std::size_t runs = 5;
};

int bench_cmd(const BenchCmd& o, const Common& common, std::ostream& out) {
    const auto specs = harness::specs_for_sides(o.n, o.sides);
    const auto rows = harness::bench_curve(specs, {.runs = o.runs, .warmup = 1});
    const json doc = {{"command", "bench"}, {"n", o.n}, {"rows", harness::to_json(rows)}};
    emit(out, common, doc, harness::to_text(rows));
    return exit_ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hilbert curve mapping and cross-dimensional distillation tool", "hdtool"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_flag("--pretty", common.pretty, "Human-readable tables instead of JSON");

    GenCurve gc;
    auto* c_gc = app.add_subcommand("gen-curve", "Build a Hilbert mapping table");
    c_gc->add_option("--n", gc.n, "Dimension (2 or 3)")->required();
    c_gc->add_option("--p", gc.p, "Curve order")->required();
    c_gc->add_option("--region", gc.region, "Region extents, comma separated")->delimiter(',');
    c_gc->add_option("--layout", gc.layout, "padded or compacted")->check(CLI::IsMember({"padded", "compacted"}));
    c_gc->add_option("--out", gc.out, "Output file (.json for JSON, otherwise HDMT)");
    c_gc->add_option("--format", gc.format, "auto, json or hdmt")->check(CLI::IsMember({"auto", "json", "hdmt"}));
    c_gc->add_option("--svg", gc.svg, "Also write an SVG drawing (n=2 only)");

    GenVh gv;
    auto* c_gv = app.add_subcommand("gen-vh", "Build a variable-length Hilbert mapping from a mask");
    c_gv->add_option("--n", gv.n, "Dimension (2 or 3)")->required();
    c_gv->add_option("--p", gv.p, "Curve order")->required();
    c_gv->add_option("--mask", gv.mask, "Tensor file of 0/1 values")->required();
    c_gv->add_option("--region", gv.region, "Expected mask extents, comma separated")->delimiter(',');
    c_gv->add_option("--out", gv.out, "Output file (.json for JSON, otherwise HDMT)");
    c_gv->add_option("--format", gv.format, "auto, json or hdmt")->check(CLI::IsMember({"auto", "json", "hdmt"}));

    LossCmd lc;
    auto* c_loss = app.add_subcommand("loss", "Evaluate the distillation loss of two feature tensors");
    c_loss->add_option("--teacher", lc.teacher, "Teacher features [D,W,H] or [C,D,W,H]")->required();
    c_loss->add_option("--student", lc.student, "Student features [W,H] or [C,W,H]")->required();
    c_loss->add_option("--kind", lc.kind, "hd or vhd")->check(CLI::IsMember({"hd", "vhd"}));
    c_loss->add_option("--teacher-am", lc.teacher_am, "Teacher activation map (vhd)");
    c_loss->add_option("--student-am", lc.student_am, "Student activation map (vhd)");
    c_loss->add_option("--theta", lc.theta, "Activation threshold in (0, 1)");
    c_loss->add_option("--rescale", lc.rescale, "left or center")->check(CLI::IsMember({"left", "center"}));
    c_loss->add_flag("--grads", lc.grads, "Also report gradient norms");

    TrainCmd tc;
    auto* c_train = app.add_subcommand("train", "Train a teacher and one student per loss_kind arm");
    c_train->add_option("--config", tc.config, "Config file (JSON or key = value lines)");
    c_train->add_option("--set", tc.set, "Override, key=value; repeatable");

    BenchCmd bc;
    auto* c_bench = app.add_subcommand("bench", "Time full-region mapping generation");
    c_bench->add_option("--n", bc.n, "Dimension (2 or 3)");
    c_bench->add_option("--sides", bc.sides, "Power-of-two sides, comma separated")->delimiter(',');
    c_bench->add_option("--runs", bc.runs, "Timed runs per side")->check(CLI::PositiveNumber);

    std::vector<std::string> argv_store{"hdtool"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (c_gc->parsed()) {
            return gen_curve(gc, common, out);
        }
        if (c_gv->parsed()) {
            return gen_vh(gv, common, out);
        }
        if (c_loss->parsed()) {
            if (lc.kind != "vhd" && (!lc.teacher_am.empty() || !lc.student_am.empty())) {
                err << "hdtool: activation maps are only used with --kind vhd\n";
                return exit_usage;
            }
            return loss_cmd(lc, common, out);
        }
        if (c_train->parsed()) {
            return train_cmd(tc, common, out);
        }
        return bench_cmd(bc, common, out);
    } catch (const Error& e) {
        err << "hdtool: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return e.kind() == ErrorKind::config ? exit_usage : exit_runtime;
    } catch (const std::exception& e) {
        err << "hdtool: " << e.what() << '\n';
        return exit_runtime;
    }
}

} // namespace hd::cli
