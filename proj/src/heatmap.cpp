// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/heatmap.hpp"

#include <cmath>

namespace sgan {

NormCoord to_normalized(PixelCoord c, int res) {
    const double s = 2.0 / static_cast<double>(res - 1);
    return {c.y * s - 1.0, c.x * s - 1.0};
}

PixelCoord to_pixel(NormCoord c, int res) {
    const double s = static_cast<double>(res - 1) / 2.0;
    return {(c.y + 1.0) * s, (c.x + 1.0) * s};
}

void HeatmapSpec::validate() const {
    if (!(var0 > 0.0) || !std::isfinite(var0)) throw ConfigError("var0 must be positive");
    if (counts[0] != 1) throw ConfigError("level 0 must have exactly one center");
    for (int l = 0; l < kNumLevels; ++l) {
        if (counts[l] < 1) throw ConfigError("every level needs at least one center");
        if (resolutions[l] < 2) throw ConfigError("level resolution must be at least 2");
    }
    if (max_tries < 1) throw ConfigError("max_tries must be positive");
}

double level_variance(double var0, int level) {
    double v = var0;
    for (int l = 0; l < level; ++l) v = v / std::sqrt(2.0);
    return v;
}

std::optional<NormCoord> accept_level0_center(PixelCoord draw, int res) {
    const auto inside = [res](double v) { return v >= 0.0 && v < static_cast<double>(res); };
    if (!inside(draw.y) || !inside(draw.x)) return std::nullopt;
    return to_normalized(draw, res);
}

std::optional<NormCoord> sample_level0_center(int res, Rng& rng) {
    if (res < 4) throw ConfigError("base resolution must be at least 4");
    const double mean = res / 2.0;
    const double stddev = res / 3.0;
    PixelCoord draw;
    draw.x = rng.normal(mean, stddev);
    draw.y = rng.normal(mean, stddev);
    return accept_level0_center(draw, res);
}

torch::Tensor gaussian_bump(int res, NormCoord center, double variance) {
    if (!(variance > 0.0)) throw Error("gaussian_bump: variance must be positive");
    if (res < 2) throw ShapeError("gaussian_bump: resolution must be at least 2");
    auto out = torch::empty({res, res}, torch::kFloat64);
    auto acc = out.accessor<double, 2>();
    const double step = 2.0 / static_cast<double>(res - 1);
    for (int i = 0; i < res; ++i) {
        const double dy = (i * step - 1.0) - center.y;
        for (int j = 0; j < res; ++j) {
            const double dx = (j * step - 1.0) - center.x;
            acc[i][j] = std::exp(-(dy * dy + dx * dx) / variance);
        }
    }
    return out;
}

namespace {

HeatmapLevel render_level(int level, int res, const std::vector<NormCoord>& centers, double variance) {
    HeatmapLevel out;
    out.level = level;
    out.resolution = res;
    out.centers = centers;
    out.variance = variance;
    std::vector<torch::Tensor> maps;
    maps.reserve(centers.size());
    for (const auto& c : centers) maps.push_back(gaussian_bump(res, c, variance));
    out.maps = torch::stack(maps);
    return out;
}

NormCoord sample_accepted_center(int res, int max_tries, Rng& rng) {
    for (int t = 0; t < max_tries; ++t) {
        if (auto c = sample_level0_center(res, rng)) return *c;
    }
    throw Error("level-0 center rejected " + std::to_string(max_tries) + " times in a row");
}

}  // namespace

HeatmapPyramid render_pyramid(int base_res, const HeatmapSpec& spec,
                              const std::vector<std::vector<NormCoord>>& centers, std::uint64_t seed) {
    spec.validate();
    if (centers.size() != static_cast<std::size_t>(kNumLevels))
        throw ShapeError("pyramid needs centers for exactly 3 levels");
    HeatmapPyramid p;
    p.base_res = base_res;
    p.seed = seed;
    p.var0 = spec.var0;
    for (int l = 0; l < kNumLevels; ++l) {
        const auto& cs = centers[static_cast<std::size_t>(l)];
        if (static_cast<int>(cs.size()) != spec.counts[l])
            throw ShapeError("level " + std::to_string(l) + " expects " + std::to_string(spec.counts[l]) +
                             " centers, got " + std::to_string(cs.size()));
        p.levels.push_back(render_level(l, spec.resolutions[l], cs, level_variance(spec.var0, l)));
    }
    return p;
}

HeatmapPyramid build_pyramid(int base_res, const HeatmapSpec& spec, NormCoord level0,
                             const std::vector<std::vector<PixelCoord>>& child_offsets_px, std::uint64_t seed) {
    if (child_offsets_px.size() != static_cast<std::size_t>(kNumLevels - 1))
        throw ShapeError("child offsets needed for levels 1 and 2");
    // Offsets are drawn in pixels of the base resolution; convert the scale only.
    const double px_to_norm = 2.0 / static_cast<double>(base_res - 1);
    std::vector<std::vector<NormCoord>> centers{{level0}};
    for (const auto& offsets : child_offsets_px) {
        std::vector<NormCoord> level;
        level.reserve(offsets.size());
        for (const auto& d : offsets) level.push_back({level0.y + d.y * px_to_norm, level0.x + d.x * px_to_norm});
        centers.push_back(std::move(level));
    }
    return render_pyramid(base_res, spec, centers, seed);
}

HeatmapPyramid sample_pyramid(int base_res, const HeatmapSpec& spec, Rng& rng) {
    spec.validate();
    const NormCoord c0 = sample_accepted_center(base_res, spec.max_tries, rng);
    const double child_std = base_res / 6.0;
    std::vector<std::vector<PixelCoord>> offsets;
    for (int l = 1; l < kNumLevels; ++l) {
        const int n = spec.counts[l];
        std::vector<PixelCoord> level(static_cast<std::size_t>(n));
        for (auto& d : level) d.x = rng.normal(0.0, child_std);
        for (auto& d : level) d.y = rng.normal(0.0, child_std);
        offsets.push_back(std::move(level));
    }
    return build_pyramid(base_res, spec, c0, offsets);
}

HeatmapPyramid sample_pyramid(int base_res, const HeatmapSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    auto p = sample_pyramid(base_res, spec, rng);
    p.seed = seed;
    return p;
}

HeatmapPyramid sample_independent_pyramid(int base_res, const HeatmapSpec& spec, Rng& rng) {
    spec.validate();
    std::vector<std::vector<NormCoord>> centers;
    for (int l = 0; l < kNumLevels; ++l) {
        std::vector<NormCoord> level;
        for (int i = 0; i < spec.counts[l]; ++i) level.push_back(sample_accepted_center(base_res, spec.max_tries, rng));
        centers.push_back(std::move(level));
    }
    return render_pyramid(base_res, spec, centers);
}

HeatmapPyramid sample_noise_pyramid(int base_res, const HeatmapSpec& spec, Rng& rng) {
    spec.validate();
    HeatmapPyramid p;
    p.base_res = base_res;
    p.var0 = spec.var0;
    for (int l = 0; l < kNumLevels; ++l) {
        HeatmapLevel level;
        level.level = l;
        level.resolution = spec.resolutions[l];
        level.variance = level_variance(spec.var0, l);
        level.maps = rng.randn({spec.counts[l], level.resolution, level.resolution}, torch::kFloat64);
        p.levels.push_back(std::move(level));
    }
    return p;
}

HeatmapPyramid sample_heatmaps(HeatmapSource source, int base_res, const HeatmapSpec& spec, Rng& rng) {
    switch (source) {
        case HeatmapSource::hierarchical: return sample_pyramid(base_res, spec, rng);
        case HeatmapSource::non_hierarchical: return sample_independent_pyramid(base_res, spec, rng);
        case HeatmapSource::gaussian_noise: return sample_noise_pyramid(base_res, spec, rng);
    }
    throw ConfigError("unknown heatmap source");
}

torch::Tensor level_sum(const HeatmapLevel& level) {
    if (!level.maps.defined() || level.maps.size(0) < 1) throw ShapeError("level_sum: level has no sub-maps");
    return level.maps.sum(0);
}

torch::Tensor stack_level(const std::vector<HeatmapPyramid>& batch, int level, torch::Dtype dtype) {
    std::vector<torch::Tensor> maps;
    maps.reserve(batch.size());
    for (const auto& p : batch) maps.push_back(p.level(level).maps);
    return torch::stack(maps).to(dtype);
}

std::vector<torch::Tensor> stack_levels(const std::vector<HeatmapPyramid>& batch, torch::Dtype dtype) {
    std::vector<torch::Tensor> out;
    for (int l = 0; l < kNumLevels; ++l) out.push_back(stack_level(batch, l, dtype));
    return out;
}

nlohmann::json pyramid_to_json(const HeatmapPyramid& p) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& level : p.levels) {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : level.centers) cs.push_back({{"y", c.y}, {"x", c.x}});
        levels.push_back(std::move(cs));
    }
    return {{"seed", p.seed}, {"base_res", p.base_res}, {"var0", p.var0}, {"levels", levels}};
}

HeatmapPyramid pyramid_from_json(const nlohmann::json& j, const HeatmapSpec& spec) {
    HeatmapSpec s = spec;
    s.var0 = j.at("var0").get<double>();
    std::vector<std::vector<NormCoord>> centers;
    for (const auto& level : j.at("levels")) {
        std::vector<NormCoord> cs;
        for (const auto& c : level) cs.push_back({c.at("y").get<double>(), c.at("x").get<double>()});
        centers.push_back(std::move(cs));
    }
    return render_pyramid(j.at("base_res").get<int>(), s, centers, j.at("seed").get<std::uint64_t>());
}

const char* to_string(HeatmapSource s) {
    switch (s) {
        case HeatmapSource::hierarchical: return "hierarchical";
        case HeatmapSource::non_hierarchical: return "non_hierarchical";
        case HeatmapSource::gaussian_noise: return "gaussian_noise";
    }
    return "?";
}

HeatmapSource heatmap_source_from_string(const std::string& s) {
    if (s == "hierarchical") return HeatmapSource::hierarchical;
    if (s == "non_hierarchical") return HeatmapSource::non_hierarchical;
    if (s == "gaussian_noise") return HeatmapSource::gaussian_noise;
    throw ConfigError("unknown heatmap_source '" + s + "'");
}

}  // namespace sgan
