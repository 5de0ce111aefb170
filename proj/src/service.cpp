// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/service.hpp"

#include <algorithm>
#include <cmath>

#include <httplib.h>

#include "sgan/attention.hpp"
#include "sgan/image_io.hpp"

namespace sgan {

namespace {

constexpr int kPreviewSize = 128;

HttpReply bad_request(const std::string& field, const std::string& message) {
    return {400, {{"error", message}, {"field", field}}};
}

nlohmann::json centers_json(const HeatmapPyramid& p) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& level : p.levels) {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : level.centers) cs.push_back({{"y", c.y}, {"x", c.x}});
        levels.push_back(std::move(cs));
    }
    return levels;
}

HttpReply not_loaded() { return {503, {{"error", "model not loaded"}}}; }

}  // namespace

EditService::EditService(std::uint64_t reset_seed) : reset_rng_(reset_seed) {}

void EditService::load(TrainState model) {
    auto loaded = std::make_shared<Loaded>(Loaded{std::move(model), {}});
    loaded->state.g->eval();
    loaded->state.d->eval();
    loaded->hash = model_hash(loaded->state);
    std::lock_guard lock(ptr_mutex_);
    model_ = std::move(loaded);
}

std::shared_ptr<EditService::Loaded> EditService::current() const {
    std::lock_guard lock(ptr_mutex_);
    return model_;
}

void EditService::load_checkpoint_file(const std::string& path) { load(load_checkpoint(path)); }

std::string EditService::checkpoint_hash() const {
    auto m = current();
    return m ? m->hash : std::string{};
}

HttpReply EditService::model_info() const {
    auto m = current();
    if (!m) return not_loaded();
    const auto& cfg = m->state.cfg;
    nlohmann::json resolutions = nlohmann::json::array();
    for (int r : cfg.heatmap.resolutions) resolutions.push_back(r);
    return {200,
            {{"base_res", cfg.base_res},
             {"levels", {0, 1, 2}},
             {"level_resolutions", resolutions},
             {"center_counts", {cfg.heatmap.counts[0], cfg.heatmap.counts[1], cfg.heatmap.counts[2]}},
             {"var0", cfg.heatmap.var0},
             {"latent_dim", cfg.latent_dim},
             {"sel_variant", to_string(cfg.sel_variant)},
             {"center_bound", kCenterClamp},
             {"checkpoint_hash", m->hash},
             {"config_hash", m->state.cfg_hash}}};
}

HttpReply EditService::generate(const nlohmann::json& req) {
    auto m = current();
    if (!m) return not_loaded();
    auto& model = m->state;
    const auto& cfg = model.cfg;
    if (!req.is_object()) return bad_request("", "request body must be a JSON object");
    if (!req.contains("seed") || !req["seed"].is_number_integer() || req["seed"].get<std::int64_t>() < 0)
        return bad_request("seed", "seed must be a nonnegative integer");
    const auto seed = req["seed"].get<std::uint64_t>();
    bool overlays = false;
    if (req.contains("include_overlays")) {
        if (!req["include_overlays"].is_boolean()) return bad_request("include_overlays", "must be a boolean");
        overlays = req["include_overlays"].get<bool>();
    }
    if (!req.contains("centers") || !req["centers"].is_array() || req["centers"].size() != kNumLevels)
        return bad_request("centers", "centers must be an array of 3 per-level arrays");
    std::vector<std::vector<NormCoord>> centers;
    for (int l = 0; l < kNumLevels; ++l) {
        const auto& level = req["centers"][static_cast<std::size_t>(l)];
        const auto field = "centers[" + std::to_string(l) + "]";
        const int expected = cfg.heatmap.counts[static_cast<std::size_t>(l)];
        if (!level.is_array() || static_cast<int>(level.size()) != expected)
            return bad_request(field, "level " + std::to_string(l) + " needs exactly " + std::to_string(expected) +
                                          " centers");
        std::vector<NormCoord> cs;
        for (std::size_t i = 0; i < level.size(); ++i) {
            const auto& c = level[i];
            const auto cfield = field + "[" + std::to_string(i) + "]";
            if (!c.is_object() || !c.contains("y") || !c.contains("x") || !c["y"].is_number() || !c["x"].is_number())
                return bad_request(cfield, "center must be an object with numeric y and x");
            const double y = c["y"].get<double>();
            const double x = c["x"].get<double>();
            if (!std::isfinite(y) || !std::isfinite(x)) return bad_request(cfield, "center must be finite");
            cs.push_back({std::clamp(y, -kCenterClamp, kCenterClamp), std::clamp(x, -kCenterClamp, kCenterClamp)});
        }
        centers.push_back(std::move(cs));
    }

    const auto pyramid = render_pyramid(cfg.base_res, cfg.heatmap, centers, seed);
    std::lock_guard lock(model_mutex_);
    torch::Tensor image;
    {
        torch::NoGradGuard no_grad;
        Rng rng(seed);
        auto z = rng.randn({1, cfg.latent_dim});
        image = sgan::generate(*model.g, z, {pyramid})[0];
    }
    nlohmann::json body{{"seed", seed}, {"centers", centers_json(pyramid)}, {"image", base64_encode(encode_png(image))}};
    nlohmann::json heatmaps = nlohmann::json::array();
    for (const auto& level : pyramid.levels)
        heatmaps.push_back(base64_encode(encode_png(colorize_map(level_sum(level).clamp(0.0, 1.0), kPreviewSize))));
    body["heatmaps"] = heatmaps;
    if (overlays) {
        std::vector<std::string> taps;
        for (int l = 0; l < kNumLevels; ++l) taps.push_back(tap_name(level_resolution(l)));
        auto maps = gradcam_taps(*model.d, image.unsqueeze(0), taps);
        nlohmann::json attn = nlohmann::json::array();
        for (const auto& t : taps) {
            auto m = normalize_max1(maps.at(t)).values[0];
            attn.push_back(base64_encode(encode_png(overlay_attention(image, m))));
        }
        body["attn"] = attn;
    }
    return {200, body};
}

HttpReply EditService::reset() {
    auto m = current();
    if (!m) return not_loaded();
    std::uint64_t seed = 0;
    {
        std::lock_guard lock(reset_mutex_);
        seed = reset_rng_.next_u64() >> 11;  // stays exact as a JSON/JS number
    }
    const auto pyramid = sample_pyramid(m->state.cfg.base_res, m->state.cfg.heatmap, seed);
    return {200, {{"seed", seed}, {"centers", centers_json(pyramid)}}};
}

void install_routes(httplib::Server& server, EditService& service, const ServeOptions& opts) {
    const std::string origin = opts.cors_origin;
    auto reply = [origin](httplib::Response& res, const HttpReply& r) {
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/model/info", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.model_info());
    });
    server.Post("/generate", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::parse_error& e) {
            reply(res, bad_request("", std::string("malformed JSON: ") + e.what()));
            return;
        }
        try {
            reply(res, service.generate(body));
        } catch (const std::exception& e) {
            reply(res, {500, {{"error", e.what()}}});
        }
    });
    server.Post("/reset", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.reset());
    });
    server.Options(R"(/.*)", [origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    if (!opts.static_dir.empty()) server.set_mount_point("/", opts.static_dir);
}

}  // namespace sgan
