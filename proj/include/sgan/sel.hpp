// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sgan/common.hpp"

namespace sgan {

enum class SelVariant { none, norm, concat, flatten };

const char* to_string(SelVariant v);
SelVariant sel_variant_from_string(const std::string& s);

struct SELOptions {
    int channels = 32;          // C of the wrapped feature map
    int heatmap_channels = 1;   // n sub-heatmaps fed in as channels
    int resolution = 4;         // side of the feature map this layer wraps
    int extract_dim = 64;       // heatmap feature width
    int concat_dim = 256;       // hidden width of the concat fusion convs
    double residual_scale = 0.1;
};

/// A layer that injects heatmaps into a feature map, shape-preserving.
class SpatialEncodingLayer : public torch::nn::Module {
public:
    /// x: [B, C, H, W]; heatmaps: [B, n, h, w]. H must equal the configured
    /// resolution; heatmaps are bilinearly resized (corner-aligned) to H x W.
    virtual torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& heatmaps) = 0;
    /// The last conv of the residual path; zero at init.
    virtual torch::nn::Conv2d& post_conv() = 0;
    const SELOptions& options() const { return opts_; }

protected:
    explicit SpatialEncodingLayer(SELOptions opts) : opts_(opts) {}
    torch::Tensor prepare_heatmaps(const torch::Tensor& x, const torch::Tensor& heatmaps) const;

    SELOptions opts_;
};

/// Normalize with instance norm, then denormalize with heatmap-predicted
/// scale and shift maps: dx = (1 + sigma) * norm(x) + mu,
/// out = x + 0.1 * post(lrelu(dx)).
class SELNorm : public SpatialEncodingLayer {
public:
    SELNorm(SELOptions opts, Rng& rng);

    struct Trace {
        torch::Tensor resized_heatmaps;
        torch::Tensor normalized;
        torch::Tensor features;
        torch::Tensor sigma;  // [B, 1, H, W]
        torch::Tensor mu;     // [B, 1, H, W]
        torch::Tensor dx;
        torch::Tensor output;
    };

    torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& heatmaps) override;
    Trace trace(const torch::Tensor& x, const torch::Tensor& heatmaps);
    torch::nn::Conv2d& post_conv() override { return post; }

    torch::nn::Conv2d extract{nullptr};
    torch::nn::Conv2d sigma_head{nullptr};
    torch::nn::Conv2d mu_head{nullptr};
    torch::nn::Conv2d post{nullptr};
};

/// Concatenate heatmap features with x and fuse with two convs
/// (C + 64 -> 256 -> C); same scaled residual as SELNorm.
class SELConcat : public SpatialEncodingLayer {
public:
    SELConcat(SELOptions opts, Rng& rng);

    torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& heatmaps) override;
    torch::nn::Conv2d& post_conv() override { return post; }

    torch::nn::Conv2d extract{nullptr};
    torch::nn::Conv2d fuse_in{nullptr};
    torch::nn::Conv2d fuse_out{nullptr};
    torch::nn::Conv2d post{nullptr};
};

std::shared_ptr<SpatialEncodingLayer> make_sel(SelVariant variant, SELOptions opts, Rng& rng);

/// Flatten ablation: [z ; vec(sum level 0) ; vec(sum level 1) ; ...].
/// z: [B, L]; level_maps[l]: [B, n_l, r_l, r_l].
torch::Tensor flatten_condition(const torch::Tensor& z, const std::vector<torch::Tensor>& level_maps);

/// Length of the flattened heatmap suffix for the given level resolutions.
int flatten_suffix_length(const std::vector<int>& resolutions);

}  // namespace sgan
