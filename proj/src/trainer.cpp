// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sgan/image_io.hpp"
#include "sgan/losses.hpp"

namespace sgan {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::unique_ptr<ImageSource> make_source(const TrainConfig& cfg) {
    if (cfg.dataset == "folder") return std::make_unique<FolderSource>(load_image_folder(cfg.data_path, cfg.base_res, cfg.flip));
    BlobSpec spec = cfg.blob;
    spec.res = cfg.base_res;
    return std::make_unique<BlobSource>(spec);
}

std::string batch_stats(const char* name, const torch::Tensor& t) {
    auto d = t.detach().to(torch::kFloat64);
    std::ostringstream os;
    os << name << "{mean=" << d.mean().item<double>() << ", std=" << (d.numel() > 1 ? d.std().item<double>() : 0.0)
       << ", min=" << d.min().item<double>() << ", max=" << d.max().item<double>()
       << ", nonfinite=" << (~torch::isfinite(d)).sum().item<std::int64_t>() << "}";
    return os.str();
}

}  // namespace

GeneratorSpec generator_spec(const TrainConfig& cfg) {
    GeneratorSpec s;
    s.latent_dim = cfg.latent_dim;
    s.base_res = cfg.base_res;
    s.out_channels = cfg.out_channels();
    s.channel_max = cfg.channel_max;
    s.sel_variant = cfg.sel_variant;
    s.heatmap_counts = cfg.heatmap.counts;
    return s;
}

DiscriminatorSpec discriminator_spec(const TrainConfig& cfg) {
    DiscriminatorSpec s;
    s.base_res = cfg.base_res;
    s.in_channels = cfg.out_channels();
    s.channel_max = cfg.channel_max;
    return s;
}

TrainState make_state(const TrainConfig& cfg) { return make_state(cfg, make_source(cfg)); }

TrainState make_state(const TrainConfig& cfg, std::unique_ptr<ImageSource> data) {
    cfg.validate();
    if (data->channels() != cfg.out_channels() || data->resolution() != cfg.base_res)
        throw ConfigError("image source does not match base_res / channel count");
    at::set_num_threads(cfg.threads);
    TrainState s{cfg, config_hash(cfg), nullptr, nullptr, nullptr, nullptr, std::move(data), nullptr,
                 Rng(cfg.seed, kStreamData), Rng(cfg.seed, kStreamLatent), Rng(cfg.seed, kStreamHeatmap), 0};
    Rng g_init(cfg.seed, kStreamGenInit);
    Rng d_init(cfg.seed, kStreamDiscInit);
    s.g = std::make_shared<Generator>(generator_spec(cfg), g_init);
    s.d = std::make_shared<Discriminator>(discriminator_spec(cfg), d_init);
    auto opts = torch::optim::AdamOptions(cfg.lr).betas({cfg.beta1, cfg.beta2});
    s.opt_g = std::make_unique<torch::optim::Adam>(s.g->parameters(), opts);
    s.opt_d = std::make_unique<torch::optim::Adam>(s.d->parameters(), opts);
    s.extractor = std::make_shared<FeatureExtractor>(cfg.out_channels());
    return s;
}

std::vector<HeatmapPyramid> sample_batch_heatmaps(const TrainConfig& cfg, int batch, Rng& rng) {
    std::vector<HeatmapPyramid> out;
    if (!cfg.uses_heatmaps()) return out;
    out.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) out.push_back(sample_heatmaps(cfg.heatmap_source, cfg.base_res, cfg.heatmap, rng));
    return out;
}

StepStats train_step(TrainState& state) {
    const auto& cfg = state.cfg;
    auto& g = *state.g;
    auto& d = *state.d;
    StepStats stats;

    // Discriminator update.
    auto reals = state.data->sample_batch(cfg.batch_size, state.data_rng).set_requires_grad(true);
    auto z = state.latent_rng.randn({cfg.batch_size, cfg.latent_dim});
    auto t0 = Clock::now();
    auto pyramids = sample_batch_heatmaps(cfg, cfg.batch_size, state.heatmap_rng);
    stats.heatmap_ms += ms_since(t0);
    torch::Tensor fakes;
    {
        torch::NoGradGuard no_grad;
        fakes = generate(g, z, pyramids);
    }
    state.opt_d->zero_grad();
    auto out_real = d.evaluate(reals);
    auto out_fake = d.evaluate(fakes);
    auto loss_adv_d = d_adv_loss(out_real.score, out_fake.score);
    auto r1 = cfg.r1_gamma > 0.0 ? r1_from_scores(out_real.score, reals, cfg.r1_gamma) : torch::zeros({});
    auto loss_d = loss_adv_d + r1;
    stats.loss_d = loss_adv_d.item<double>();
    stats.r1 = r1.item<double>();
    stats.min_real = out_real.score.min().item<double>();
    stats.max_fake = out_fake.score.max().item<double>();
    if (!std::isfinite(stats.loss_d) || !std::isfinite(stats.r1))
        throw TrainingError("non-finite discriminator loss at step " + std::to_string(state.step) + ": " +
                            batch_stats("real", reals) + " " + batch_stats("fake", fakes) + " " +
                            batch_stats("score_real", out_real.score) + " " + batch_stats("score_fake", out_fake.score));
    loss_d.backward();
    state.opt_d->step();

    // Generator update; D is frozen so neither loss term reaches its parameters.
    auto z2 = state.latent_rng.randn({cfg.batch_size, cfg.latent_dim});
    t0 = Clock::now();
    auto pyramids2 = sample_batch_heatmaps(cfg, cfg.batch_size, state.heatmap_rng);
    stats.heatmap_ms += ms_since(t0);
    {
        FrozenParameters frozen(d.parameters());
        auto fakes2 = generate(g, z2, pyramids2);
        auto out = d.evaluate(fakes2);
        auto loss_g = g_adv_loss(out.score);
        auto total = loss_g;
        if (cfg.uses_heatmaps()) {
            auto targets = alignment_targets(pyramids2, cfg.align, fakes2.scalar_type());
            auto align = alignment_loss_from_output(out, targets, cfg.align);
            stats.l_align = align.truncated.item<double>();
            if (cfg.align.weight > 0.0 && state.step >= cfg.align_warmup) total = total + align.loss;
        }
        stats.loss_g = loss_g.item<double>();
        if (!std::isfinite(stats.loss_g) || !std::isfinite(stats.l_align))
            throw TrainingError("non-finite generator loss at step " + std::to_string(state.step) + ": " +
                                batch_stats("fake", fakes2) + " " + batch_stats("score_fake", out.score));
        state.opt_g->zero_grad();
        total.backward();
        state.opt_g->step();
    }
    ++state.step;
    return stats;
}

torch::Tensor render_grid(Generator& g, const std::vector<HeatmapPyramid>& rows, const torch::Tensor& latents,
                          int n_rows) {
    torch::NoGradGuard no_grad;
    if (!rows.empty() && static_cast<int>(rows.size()) != n_rows) throw ShapeError("render_grid: one pyramid per row");
    const int cols = static_cast<int>(latents.size(0));
    std::vector<HeatmapPyramid> pyramids;
    std::vector<torch::Tensor> zs;
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!rows.empty()) pyramids.push_back(rows[static_cast<std::size_t>(r)]);
            zs.push_back(latents[c]);
        }
    }
    auto images = generate(g, torch::stack(zs), pyramids);
    return make_grid(images, n_rows, cols);
}

torch::Tensor sample_grid(Generator& g, const TrainConfig& cfg, int rows, int cols, Rng& rng) {
    auto row_pyramids = sample_batch_heatmaps(cfg, rows, rng);
    auto latents = rng.randn({cols, cfg.latent_dim});
    return render_grid(g, row_pyramids, latents, rows);
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json j{{"di", di.to_json()}, {"fid", fid.value}, {"fid_regularized", fid.regularized},
                     {"config_hash", config_hash}};
    if (spatial) j["spatial"] = {{"r_x", spatial->r_x}, {"r_y", spatial->r_y}, {"n", spatial->requested.size()}};
    return j;
}

EvalReport evaluate(TrainState& state) {
    const auto& cfg = state.cfg;
    torch::NoGradGuard no_grad;
    Rng rng(cfg.seed, kStreamEval);
    const int n = cfg.eval_pool;
    constexpr int kChunk = 256;

    auto reals = state.data->draw_independent(n, rng);
    std::vector<torch::Tensor> fake_parts;
    for (int i = 0; i < n; i += kChunk) {
        const int b = std::min(kChunk, n - i);
        auto z = rng.randn({b, cfg.latent_dim});
        fake_parts.push_back(generate(*state.g, z, sample_batch_heatmaps(cfg, b, rng)));
    }
    auto fakes = torch::cat(fake_parts);

    auto scores = [&](const torch::Tensor& images) {
        std::vector<double> out;
        for (std::int64_t i = 0; i < images.size(0); i += kChunk) {
            auto s = state.d->evaluate(images.slice(0, i, std::min<std::int64_t>(i + kChunk, images.size(0)))).score;
            auto c = s.to(torch::kFloat64).contiguous();
            out.insert(out.end(), c.data_ptr<double>(), c.data_ptr<double>() + c.numel());
        }
        return out;
    };
    const auto real_scores = scores(reals);
    const auto fake_scores = scores(fakes);

    EvalReport report;
    report.di = disequilibrium_indicator(real_scores, fake_scores, rng, cfg.di_repeats, cfg.di_per_side, cfg.seed);
    report.fid = fid_between_sets(reals, fakes, *state.extractor);
    report.grid = sample_grid(*state.g, cfg, cfg.grid_rows, cfg.grid_cols, rng);
    if (cfg.dataset == "blobs") report.spatial = measure_spatial_awareness(*state.g, cfg, kSpatialProbeSize, rng);
    report.config_hash = state.cfg_hash;
    return report;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw Error("pearson: need two equally sized samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

SpatialAwareness measure_spatial_awareness(Generator& g, const TrainConfig& cfg, int n, Rng& rng) {
    torch::NoGradGuard no_grad;
    SpatialAwareness out;
    constexpr int kChunk = 64;
    for (int i = 0; i < n; i += kChunk) {
        const int b = std::min(kChunk, n - i);
        std::vector<HeatmapPyramid> pyramids;
        for (int k = 0; k < b; ++k) pyramids.push_back(sample_pyramid(cfg.base_res, cfg.heatmap, rng));
        auto z = rng.randn({b, cfg.latent_dim});
        auto images = g.spec().sel_variant == SelVariant::none ? g.forward(z, {}) : generate(g, z, pyramids);
        for (int k = 0; k < b; ++k) {
            out.requested.push_back(to_pixel(pyramids[static_cast<std::size_t>(k)].level0_center(), cfg.base_res));
            out.achieved.push_back(blob_centroid(images[k]));
        }
    }
    std::vector<double> rx, ry, ax, ay;
    for (std::size_t i = 0; i < out.requested.size(); ++i) {
        rx.push_back(out.requested[i].x);
        ry.push_back(out.requested[i].y);
        ax.push_back(out.achieved[i].x);
        ay.push_back(out.achieved[i].y);
    }
    out.r_x = pearson(rx, ax);
    out.r_y = pearson(ry, ay);
    return out;
}

std::string model_hash(TrainState& state) {
    std::vector<torch::Tensor> ts = state.g->parameters();
    for (auto& b : state.g->buffers()) ts.push_back(b);
    for (auto& p : state.d->parameters()) ts.push_back(p);
    for (auto& b : state.d->buffers()) ts.push_back(b);
    return tensors_hash(ts);
}

void save_checkpoint(TrainState& state, const std::string& path) {
    torch::serialize::OutputArchive archive;
    archive.write("version", c10::IValue(kCheckpointVersion));
    archive.write("step", c10::IValue(state.step));
    archive.write("config", c10::IValue(config_to_text(state.cfg)));
    archive.write("config_hash", c10::IValue(state.cfg_hash));
    archive.write("rng_data", c10::IValue(state.data_rng.state()));
    archive.write("rng_latent", c10::IValue(state.latent_rng.state()));
    archive.write("rng_heatmap", c10::IValue(state.heatmap_rng.state()));
    archive.write("data_state", c10::IValue(state.data->state()));
    auto sub = [&](const char* key, auto&& save) {
        torch::serialize::OutputArchive a;
        save(a);
        archive.write(key, a);
    };
    sub("G", [&](auto& a) { state.g->save(a); });
    sub("D", [&](auto& a) { state.d->save(a); });
    sub("opt_G", [&](auto& a) { state.opt_g->save(a); });
    sub("opt_D", [&](auto& a) { state.opt_d->save(a); });
    sub("extractor", [&](auto& a) { state.extractor->save(a); });
    const auto tmp = path + ".tmp";
    archive.save_to(tmp);
    std::filesystem::rename(tmp, path);
}

namespace {

std::string read_string(torch::serialize::InputArchive& a, const char* key) {
    c10::IValue v;
    a.read(key, v);
    if (!v.isString()) throw CheckpointError(std::string("checkpoint field '") + key + "' is not a string");
    return v.toStringRef();
}

std::int64_t read_int(torch::serialize::InputArchive& a, const char* key) {
    c10::IValue v;
    a.read(key, v);
    if (!v.isInt()) throw CheckpointError(std::string("checkpoint field '") + key + "' is not an integer");
    return v.toInt();
}

}  // namespace

TrainState load_checkpoint(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw CheckpointError("checkpoint '" + path + "' does not exist");
    try {
        torch::serialize::InputArchive archive;
        archive.load_from(path);
        const auto version = read_int(archive, "version");
        if (version != kCheckpointVersion)
            throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                                  std::to_string(kCheckpointVersion) + ")");
        auto cfg = parse_config_text(read_string(archive, "config"));
        auto state = make_state(cfg);
        if (read_string(archive, "config_hash") != state.cfg_hash)
            throw CheckpointError("checkpoint config hash does not match its stored config");
        state.step = read_int(archive, "step");
        state.data_rng.set_state(read_string(archive, "rng_data"));
        state.latent_rng.set_state(read_string(archive, "rng_latent"));
        state.heatmap_rng.set_state(read_string(archive, "rng_heatmap"));
        state.data->set_state(read_string(archive, "data_state"));
        auto sub = [&](const char* key, auto&& load) {
            torch::serialize::InputArchive a;
            archive.read(key, a);
            load(a);
        };
        sub("G", [&](auto& a) { state.g->load(a); });
        sub("D", [&](auto& a) { state.d->load(a); });
        sub("opt_G", [&](auto& a) { state.opt_g->load(a); });
        sub("opt_D", [&](auto& a) { state.opt_d->load(a); });
        sub("extractor", [&](auto& a) { state.extractor->load(a); });
        return state;
    } catch (const c10::Error& e) {
        throw CheckpointError("cannot read checkpoint '" + path + "': " + e.what_without_backtrace());
    } catch (const ConfigError& e) {
        throw CheckpointError("checkpoint '" + path + "' holds an invalid config: " + e.what());
    }
}

RunResult run_training(TrainState& state, const RunOptions& opts) {
    namespace fs = std::filesystem;
    const auto& cfg = state.cfg;
    fs::create_directories(opts.run_dir);
    const fs::path dir(opts.run_dir);
    RunResult result;
    result.metrics_log = (dir / "metrics.jsonl").string();
    result.timing_log = (dir / "timing.jsonl").string();
    {
        std::ofstream c(dir / "config.txt");
        c << "# config_hash = " << state.cfg_hash << "\n" << config_to_text(cfg);
    }
    result.outputs.push_back((dir / "config.txt").string());
    const auto mode = state.step == 0 ? std::ios::trunc : std::ios::app;
    std::ofstream metrics(result.metrics_log, mode);
    std::ofstream timing(result.timing_log, mode);

    auto save_eval = [&](const EvalReport& report, MetricsRecord& rec) {
        rec.di_mean = report.di.di_mean;
        rec.fid = report.fid.value;
        char name[64];
        std::snprintf(name, sizeof(name), "samples_%06lld", static_cast<long long>(state.step));
        const auto png = (dir / (std::string(name) + ".png")).string();
        write_png(png, report.grid);
        std::ofstream side(png + ".json");
        side << nlohmann::json{{"config_hash", state.cfg_hash}, {"step", state.step},
                               {"rows", cfg.grid_rows}, {"cols", cfg.grid_cols}}.dump() << "\n";
        std::snprintf(name, sizeof(name), "eval_%06lld.json", static_cast<long long>(state.step));
        std::ofstream ej(dir / name);
        auto j = report.to_json();
        j["step"] = state.step;
        ej << j.dump(2) << "\n";
        result.outputs.push_back(png);
        result.outputs.push_back((dir / name).string());
    };

    const auto last = opts.stop_at >= 0 ? std::min(opts.stop_at, cfg.total_steps) : cfg.total_steps;
    while (state.step < last) {
        const auto t0 = Clock::now();
        const auto stats = train_step(state);
        const double wall = ms_since(t0);
        timing << nlohmann::json{{"step", state.step}, {"wall_ms", wall}, {"heatmap_ms", stats.heatmap_ms},
                                 {"config_hash", state.cfg_hash}}.dump() << "\n";
        const bool eval_now = cfg.eval_every > 0 && state.step % cfg.eval_every == 0;
        if (state.step % cfg.log_every == 0 || state.step == cfg.total_steps || eval_now) {
            MetricsRecord rec{state.step, stats.loss_d, stats.loss_g, stats.l_align, stats.min_real, stats.max_fake,
                              std::nullopt, std::nullopt, state.cfg_hash};
            if (eval_now) save_eval(evaluate(state), rec);
            metrics << to_log_line(rec);
            metrics.flush();
            if (!opts.quiet)
                std::cerr << "step " << state.step << " loss_D " << stats.loss_d << " loss_G " << stats.loss_g
                          << " L_align " << stats.l_align << " (" << wall << " ms)\n";
        }
        if (cfg.checkpoint_every > 0 && state.step % cfg.checkpoint_every == 0 && state.step < cfg.total_steps) {
            char name[64];
            std::snprintf(name, sizeof(name), "checkpoint_%06lld.pt", static_cast<long long>(state.step));
            save_checkpoint(state, (dir / name).string());
            result.outputs.push_back((dir / name).string());
        }
    }
    result.checkpoint = (dir / "checkpoint.pt").string();
    save_checkpoint(state, result.checkpoint);
    result.outputs.push_back(result.metrics_log);
    result.outputs.push_back(result.timing_log);
    result.outputs.push_back(result.checkpoint);
    return result;
}

}  // namespace sgan
