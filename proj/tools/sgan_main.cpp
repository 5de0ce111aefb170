// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

// sgan: train, evaluate, visualize and serve spatially-aware GANs.
//
// Every command prints the paths it writes to stdout, one per line. Failures
// print a single JSON line {"error": kind, "message": ...} to stderr and exit
// nonzero.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgan/attention.hpp"
#include "sgan/config.hpp"
#include "sgan/image_io.hpp"
#include "sgan/service.hpp"
#include "sgan/trainer.hpp"

// After Eigen: resolv.h (via httplib) defines a macro named _res.
#include <httplib.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public sgan::Error {
public:
    using sgan::Error::Error;
};

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const sgan::ConfigError*>(&e)) return "config";
    if (dynamic_cast<const sgan::CheckpointError*>(&e)) return "checkpoint";
    if (dynamic_cast<const sgan::TrainingError*>(&e)) return "training";
    if (dynamic_cast<const sgan::ShapeError*>(&e)) return "shape";
    if (dynamic_cast<const UsageError*>(&e)) return "usage";
    if (dynamic_cast<const sgan::Error*>(&e)) return "runtime";
    if (dynamic_cast<const c10::Error*>(&e)) return "tensor";
    return "internal";
}

int fail(const std::string& kind, const std::string& message, int code = 1) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
    return code;
}

void emit(const std::string& path) { std::cout << path << "\n"; }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sgan::Error("cannot write '" + path.string() + "'");
    out << text;
}

void ensure_dir(const fs::path& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

// Config keys become --<key> flags on every command that builds a config.
struct Overrides {
    std::map<std::string, std::string> values;

    void attach(CLI::App& cmd) {
        for (const auto& k : sgan::config_keys()) {
            auto* opt = cmd.add_option("--" + k.name, values[k.name], k.help);
            opt->group("Config keys");
        }
    }
    std::vector<std::pair<std::string, std::string>> given(const CLI::App& cmd) const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& k : sgan::config_keys())
            if (cmd.count("--" + k.name) > 0) out.emplace_back(k.name, values.at(k.name));
        return out;
    }
};

sgan::TrainState open_checkpoint(const std::string& path) {
    if (path.empty()) throw UsageError("--checkpoint is required");
    return sgan::load_checkpoint(path);
}

// ---- train ----

struct TrainArgs {
    std::string config;
    std::string run_dir;
    std::string resume;
    std::int64_t stop_at = -1;
    bool quiet = false;
    Overrides overrides;
};

int cmd_train(const TrainArgs& a, const CLI::App& cmd) {
    sgan::TrainState state;
    const auto given = a.overrides.given(cmd);
    if (!a.resume.empty()) {
        if (!a.config.empty()) throw UsageError("--config cannot be combined with --resume");
        state = sgan::load_checkpoint(a.resume);
        for (const auto& [k, v] : given) {
            if (k != "total_steps") throw UsageError("only --total_steps may change on --resume (got --" + k + ")");
            sgan::set_config_value(state.cfg, k, v);
        }
        state.cfg.validate();
        state.cfg_hash = sgan::config_hash(state.cfg);
    } else {
        sgan::TrainConfig cfg;
        if (!a.config.empty()) cfg = sgan::load_config_file(a.config);
        for (const auto& [k, v] : given) sgan::set_config_value(cfg, k, v);
        state = sgan::make_state(cfg);
    }
    std::string dir = a.run_dir;
    if (dir.empty()) dir = a.resume.empty() ? "runs/" + state.cfg_hash.substr(0, 12) : fs::path(a.resume).parent_path().string();
    auto result = sgan::run_training(state, {dir, a.quiet, a.stop_at});
    for (const auto& p : result.outputs) emit(p);
    return 0;
}

// ---- eval ----

int cmd_eval(const std::string& checkpoint, const std::string& out_dir) {
    auto state = open_checkpoint(checkpoint);
    const fs::path dir = out_dir.empty() ? fs::path(checkpoint).parent_path() : fs::path(out_dir);
    ensure_dir(dir);
    auto report = sgan::evaluate(state);
    auto j = report.to_json();
    j["step"] = state.step;
    const auto report_path = dir / "eval.json";
    write_text(report_path, j.dump(2) + "\n");
    const auto grid_path = dir / "eval_samples.png";
    sgan::write_png(grid_path.string(), report.grid);
    write_text(grid_path.string() + ".json", json{{"config_hash", state.cfg_hash}, {"step", state.step}}.dump() + "\n");
    emit(report_path.string());
    emit(grid_path.string());
    emit(grid_path.string() + ".json");
    return 0;
}

// ---- attn ----

struct AttnArgs {
    std::string checkpoint;
    std::string image;
    std::uint64_t seed = 0;
    std::vector<std::string> taps{"r16", "r8", "r4"};
    std::string out_dir = "attn";
    double alpha = 0.5;
};

int cmd_attn(const AttnArgs& a) {
    auto state = open_checkpoint(a.checkpoint);
    const auto& cfg = state.cfg;
    torch::Tensor image;
    if (!a.image.empty()) {
        auto img = sgan::read_image(a.image, cfg.base_res, cfg.out_channels());
        if (!img) throw sgan::Error("cannot decode image '" + a.image + "'");
        image = *img;
    } else {
        torch::NoGradGuard ng;
        sgan::Rng rng(a.seed);
        auto z = rng.randn({1, cfg.latent_dim});
        std::vector<sgan::HeatmapPyramid> pyr;
        if (cfg.uses_heatmaps()) pyr.push_back(sgan::sample_pyramid(cfg.base_res, cfg.heatmap, a.seed));
        image = sgan::generate(*state.g, z, pyr)[0];
    }
    const fs::path dir(a.out_dir);
    ensure_dir(dir);
    const auto input_path = dir / "input.png";
    sgan::write_png(input_path.string(), image);
    emit(input_path.string());
    auto maps = sgan::gradcam_taps(*state.d, image.unsqueeze(0), a.taps);
    const int size = std::max<int>(128, static_cast<int>(image.size(1)));
    auto big = torch::nn::functional::interpolate(
                   image.unsqueeze(0), torch::nn::functional::InterpolateFuncOptions()
                                           .size(std::vector<int64_t>{size, size})
                                           .mode(torch::kBilinear)
                                           .align_corners(true))[0];
    for (const auto& tap : a.taps) {
        auto m = sgan::normalize_max1(maps.at(tap)).values[0];
        const auto path = dir / ("attn_" + tap + ".png");
        sgan::write_png(path.string(), sgan::overlay_attention(big, m, a.alpha));
        emit(path.string());
    }
    return 0;
}

// ---- sample ----

struct SampleArgs {
    std::string checkpoint;
    int rows = 4;
    int cols = 8;
    std::uint64_t seed = 0;
    std::string pyramids;
    std::string out = "samples.png";
};

int cmd_sample(const SampleArgs& a) {
    if (a.rows < 1 || a.cols < 1) throw UsageError("--rows and --cols must be positive");
    auto state = open_checkpoint(a.checkpoint);
    const auto& cfg = state.cfg;
    sgan::Rng rng(a.seed);
    std::vector<sgan::HeatmapPyramid> rows;
    int n_rows = a.rows;
    if (!a.pyramids.empty()) {
        if (!cfg.uses_heatmaps()) throw UsageError("--pyramids given but the model takes no heatmaps");
        std::ifstream in(a.pyramids);
        if (!in) throw sgan::Error("cannot read '" + a.pyramids + "'");
        auto j = json::parse(in);
        if (!j.is_array() || j.empty()) throw UsageError("--pyramids must hold a non-empty JSON array of pyramids");
        for (const auto& p : j) rows.push_back(sgan::pyramid_from_json(p, cfg.heatmap));
        n_rows = static_cast<int>(rows.size());
    } else {
        rows = sgan::sample_batch_heatmaps(cfg, a.rows, rng);
    }
    auto latents = rng.randn({a.cols, cfg.latent_dim});
    auto grid = sgan::render_grid(*state.g, rows, latents, n_rows);
    const fs::path out(a.out);
    ensure_dir(out.parent_path());
    sgan::write_png(out.string(), grid);
    json side{{"config_hash", state.cfg_hash}, {"step", state.step}, {"rows", n_rows}, {"cols", a.cols},
              {"seed", a.seed}, {"pyramids", json::array()}};
    for (const auto& p : rows) side["pyramids"].push_back(sgan::pyramid_to_json(p));
    write_text(out.string() + ".json", side.dump() + "\n");
    emit(out.string());
    emit(out.string() + ".json");
    return 0;
}

// ---- heatmap ----

struct HeatmapArgs {
    std::uint64_t seed = 0;
    int base_res = 32;
    double var0 = 0.5;
    std::string source = "hierarchical";
    int size = 128;
    std::string out_dir = "heatmap";
};

int cmd_heatmap(const HeatmapArgs& a) {
    sgan::HeatmapSpec spec;
    spec.var0 = a.var0;
    spec.validate();
    sgan::Rng rng(a.seed);
    auto source = sgan::heatmap_source_from_string(a.source);
    auto p = sgan::sample_heatmaps(source, a.base_res, spec, rng);
    p.seed = a.seed;
    const fs::path dir(a.out_dir);
    ensure_dir(dir);
    for (const auto& level : p.levels) {
        auto sum = sgan::level_sum(level);
        if (source == sgan::HeatmapSource::gaussian_noise) {  // unbounded; rescale for display
            sum = (sum - sum.min()) / (sum.max() - sum.min() + 1e-12);
        }
        const auto path = dir / ("level" + std::to_string(level.level) + ".png");
        sgan::write_png(path.string(), sgan::colorize_map(sum.clamp(0.0, 1.0), a.size));
        emit(path.string());
    }
    const auto jpath = dir / "pyramid.json";
    write_text(jpath, sgan::pyramid_to_json(p).dump() + "\n");
    emit(jpath.string());
    return 0;
}

// ---- serve ----

struct ServeArgs {
    std::string checkpoint;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;
    std::string cors_origin = "*";
    std::uint64_t reset_seed = 0;
};

int cmd_serve(const ServeArgs& a) {
    sgan::EditService service(a.reset_seed);
    service.load_checkpoint_file(a.checkpoint);
    httplib::Server server;
    sgan::install_routes(server, service, {a.cors_origin, a.static_dir});
    if (!server.bind_to_port(a.host, a.port)) throw sgan::Error("cannot bind " + a.host + ":" + std::to_string(a.port));
    std::cerr << json{{"listening", "http://" + a.host + ":" + std::to_string(a.port)},
                      {"checkpoint_hash", service.checkpoint_hash()}}.dump()
              << std::endl;
    server.listen_after_bind();
    return 0;
}

// ---- plot ----

int cmd_plot(const std::string& log, const std::string& out) {
    auto series = sgan::score_curves(sgan::read_metrics_log(log));
    const fs::path path(out);
    ensure_dir(path.parent_path());
    write_text(path, sgan::score_curves_svg(series));
    emit(path.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatially-aware GAN toolkit: heatmap-conditioned generation with attention alignment"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand help for every command");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Train a model; every config key is a flag");
    t->add_option("--config", train.config, "Config file (key = value lines)")->check(CLI::ExistingFile);
    t->add_option("--run-dir", train.run_dir, "Output directory (default runs/<config hash>)");
    t->add_option("--resume", train.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);
    t->add_option("--stop-at", train.stop_at, "Stop and checkpoint at this step");
    t->add_flag("--quiet", train.quiet, "No progress lines");
    train.overrides.attach(*t);

    std::string eval_ckpt, eval_out;
    auto* e = app.add_subcommand("eval", "DI, FID and a sample grid for a checkpoint");
    e->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
    e->add_option("--out", eval_out, "Output directory (default: the checkpoint's)");

    AttnArgs attn;
    auto* at = app.add_subcommand("attn", "GradCAM overlays at discriminator taps");
    at->add_option("--checkpoint", attn.checkpoint, "Checkpoint file")->required();
    auto* img_opt = at->add_option("--image", attn.image, "Input image (default: generate from --seed)");
    at->add_option("--seed", attn.seed, "Latent and heatmap seed for a generated input")->excludes(img_opt);
    at->add_option("--taps", attn.taps, "Tap names")->delimiter(',');
    at->add_option("--out", attn.out_dir, "Output directory");
    at->add_option("--alpha", attn.alpha, "Overlay opacity")->check(CLI::Range(0.0, 1.0));

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "Sample grid: rows share a pyramid, columns share a latent");
    s->add_option("--checkpoint", sample.checkpoint, "Checkpoint file")->required();
    s->add_option("--rows", sample.rows, "Grid rows");
    s->add_option("--cols", sample.cols, "Grid columns");
    s->add_option("--seed", sample.seed, "Sampling seed");
    s->add_option("--pyramids", sample.pyramids, "JSON array of pyramid records, one per row")->check(CLI::ExistingFile);
    s->add_option("--out", sample.out, "Output PNG");

    HeatmapArgs heat;
    auto* h = app.add_subcommand("heatmap", "Render a sampled heatmap pyramid");
    h->add_option("--seed", heat.seed, "Sampling seed");
    h->add_option("--base_res", heat.base_res, "Image resolution the centers refer to");
    h->add_option("--var0", heat.var0, "Level-0 bump variance");
    h->add_option("--heatmap_source", heat.source, "hierarchical | non_hierarchical | gaussian_noise");
    h->add_option("--size", heat.size, "Output PNG side");
    h->add_option("--out", heat.out_dir, "Output directory");

    ServeArgs serve;
    auto* sv = app.add_subcommand("serve", "HTTP editing service");
    sv->add_option("--checkpoint", serve.checkpoint, "Checkpoint file")->required();
    sv->add_option("--host", serve.host, "Bind address");
    sv->add_option("--port", serve.port, "Port");
    sv->add_option("--static-dir", serve.static_dir, "Serve UI assets from this directory");
    sv->add_option("--cors-origin", serve.cors_origin, "Access-Control-Allow-Origin value");
    sv->add_option("--reset-seed", serve.reset_seed, "Seed of the /reset sequence");

    std::string plot_log, plot_out = "scores.svg";
    auto* pl = app.add_subcommand("plot", "Real/fake score curves from a metrics log");
    pl->add_option("--log", plot_log, "metrics.jsonl")->required()->check(CLI::ExistingFile);
    pl->add_option("--out", plot_out, "Output SVG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        return fail("usage", ex.what(), 2);
    }

    try {
        if (*t) return cmd_train(train, *t);
        if (*e) return cmd_eval(eval_ckpt, eval_out);
        if (*at) return cmd_attn(attn);
        if (*s) return cmd_sample(sample);
        if (*h) return cmd_heatmap(heat);
        if (*sv) return cmd_serve(serve);
        if (*pl) return cmd_plot(plot_log, plot_out);
    } catch (const UsageError& ex) {
        return fail("usage", ex.what(), 2);
    } catch (const c10::Error& ex) {
        return fail("tensor", ex.what_without_backtrace());
    } catch (const std::exception& ex) {
        return fail(error_kind(ex), ex.what());
    }
    return 0;
}
