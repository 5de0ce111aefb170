// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgan/common.hpp"

namespace sgan {

enum class Frame { pixel, normalized };

/// A 2-D point tagged with its coordinate frame. Pixel coordinates live in
/// [0, res); normalized coordinates map cell i to 2i/(res-1) - 1.
template <Frame F>
struct Coord {
    double y = 0.0;
    double x = 0.0;

    friend bool operator==(const Coord&, const Coord&) = default;
    friend std::ostream& operator<<(std::ostream& os, const Coord& c) {
        return os << '(' << c.y << ", " << c.x << ')';
    }
};

using PixelCoord = Coord<Frame::pixel>;
using NormCoord = Coord<Frame::normalized>;

NormCoord to_normalized(PixelCoord c, int res);
PixelCoord to_pixel(NormCoord c, int res);

inline constexpr int kNumLevels = 3;

/// Level schedule: how many centers each level gets, the feature-map side
/// each level is rendered at, and the level-0 bump variance (normalized
/// units squared). Variances shrink by sqrt(2) per level.
struct HeatmapSpec {
    double var0 = 0.5;
    std::array<int, kNumLevels> counts{1, 2, 4};
    std::array<int, kNumLevels> resolutions{4, 8, 16};
    /// Upper bound on level-0 rejection retries before giving up.
    int max_tries = 100;

    void validate() const;
};

/// Where a pyramid's maps come from during training.
enum class HeatmapSource {
    hierarchical,      // children are offsets of the level-0 center
    non_hierarchical,  // every center drawn independently
    gaussian_noise,    // unstructured N(0,1) maps, no centers
};

struct HeatmapLevel {
    int level = 0;
    int resolution = 0;
    std::vector<NormCoord> centers;
    double variance = 0.0;
    /// [n, resolution, resolution], float64; one sub-heatmap per center.
    torch::Tensor maps;
};

struct HeatmapPyramid {
    std::vector<HeatmapLevel> levels;
    int base_res = 0;
    std::uint64_t seed = 0;
    double var0 = 0.0;

    const HeatmapLevel& level(int l) const { return levels.at(static_cast<std::size_t>(l)); }
    NormCoord level0_center() const { return level(0).centers.at(0); }
};

/// Variance of level `level` given the level-0 variance.
double level_variance(double var0, int level);

/// Applies the level-0 acceptance rule to a pixel-frame draw. Returns the
/// normalized center, or nullopt when either axis falls outside [0, res).
std::optional<NormCoord> accept_level0_center(PixelCoord draw, int res);

/// One level-0 draw: per-axis N(res/2, (res/3)^2) in pixels, x first.
std::optional<NormCoord> sample_level0_center(int res, Rng& rng);

/// exp(-|g - center|^2 / variance) on a res x res normalized grid.
torch::Tensor gaussian_bump(int res, NormCoord center, double variance);

/// Renders a pyramid from explicit per-level centers; nothing is sampled.
HeatmapPyramid render_pyramid(int base_res, const HeatmapSpec& spec,
                              const std::vector<std::vector<NormCoord>>& centers,
                              std::uint64_t seed = 0);

/// Builds a hierarchical pyramid from a level-0 center and per-level child
/// offsets given in pixels of the base resolution.
HeatmapPyramid build_pyramid(int base_res, const HeatmapSpec& spec, NormCoord level0,
                             const std::vector<std::vector<PixelCoord>>& child_offsets_px,
                             std::uint64_t seed = 0);

/// Hierarchical sampling: level-0 center with bounded rejection retries, then
/// child offsets with pixel std base_res/6 (children are never rejected).
HeatmapPyramid sample_pyramid(int base_res, const HeatmapSpec& spec, Rng& rng);
HeatmapPyramid sample_pyramid(int base_res, const HeatmapSpec& spec, std::uint64_t seed);

/// Every center drawn independently from the level-0 distribution.
HeatmapPyramid sample_independent_pyramid(int base_res, const HeatmapSpec& spec, Rng& rng);

/// Per-level N(0,1) maps with the configured channel counts and no centers.
HeatmapPyramid sample_noise_pyramid(int base_res, const HeatmapSpec& spec, Rng& rng);

HeatmapPyramid sample_heatmaps(HeatmapSource source, int base_res, const HeatmapSpec& spec, Rng& rng);

/// Elementwise sum of the level's sub-heatmaps, [res, res].
torch::Tensor level_sum(const HeatmapLevel& level);

/// Stacks one level across a batch of pyramids into [B, n, r, r].
torch::Tensor stack_level(const std::vector<HeatmapPyramid>& batch, int level,
                          torch::Dtype dtype = torch::kFloat32);
std::vector<torch::Tensor> stack_levels(const std::vector<HeatmapPyramid>& batch,
                                        torch::Dtype dtype = torch::kFloat32);

/// {seed, base_res, var0, levels: [[{y, x}, ...], ...]} in normalized coords.
nlohmann::json pyramid_to_json(const HeatmapPyramid& p);
HeatmapPyramid pyramid_from_json(const nlohmann::json& j, const HeatmapSpec& spec);

const char* to_string(HeatmapSource s);
HeatmapSource heatmap_source_from_string(const std::string& s);

}  // namespace sgan
