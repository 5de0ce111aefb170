// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/sel.hpp"

#include "sgan/layers.hpp"

namespace sgan {

namespace F = torch::nn::functional;

const char* to_string(SelVariant v) {
    switch (v) {
        case SelVariant::none: return "none";
        case SelVariant::norm: return "norm";
        case SelVariant::concat: return "concat";
        case SelVariant::flatten: return "flatten";
    }
    return "?";
}

SelVariant sel_variant_from_string(const std::string& s) {
    if (s == "none") return SelVariant::none;
    if (s == "norm") return SelVariant::norm;
    if (s == "concat") return SelVariant::concat;
    if (s == "flatten") return SelVariant::flatten;
    throw ConfigError("unknown sel_variant '" + s + "'");
}

torch::Tensor SpatialEncodingLayer::prepare_heatmaps(const torch::Tensor& x, const torch::Tensor& heatmaps) const {
    if (x.dim() != 4 || x.size(1) != opts_.channels)
        throw ShapeError("SEL: expected [B, " + std::to_string(opts_.channels) + ", H, W] features");
    if (x.size(2) != opts_.resolution || x.size(3) != opts_.resolution)
        throw ShapeError("SEL: feature map is " + std::to_string(x.size(2)) + "x" + std::to_string(x.size(3)) +
                         " but the layer wraps level resolution " + std::to_string(opts_.resolution));
    if (heatmaps.dim() != 4 || heatmaps.size(0) != x.size(0) || heatmaps.size(1) != opts_.heatmap_channels)
        throw ShapeError("SEL: expected [B, " + std::to_string(opts_.heatmap_channels) + ", h, w] heatmaps");
    auto hm = heatmaps.to(x.dtype());
    if (hm.size(2) == x.size(2) && hm.size(3) == x.size(3)) return hm;
    return F::interpolate(hm, F::InterpolateFuncOptions()
                                  .size(std::vector<int64_t>{x.size(2), x.size(3)})
                                  .mode(torch::kBilinear)
                                  .align_corners(true));
}

SELNorm::SELNorm(SELOptions opts, Rng& rng) : SpatialEncodingLayer(opts) {
    extract = register_module("extract", make_conv(opts.heatmap_channels, opts.extract_dim, 3));
    sigma_head = register_module("sigma_head", make_conv(opts.extract_dim, 1, 3));
    mu_head = register_module("mu_head", make_conv(opts.extract_dim, 1, 3));
    post = register_module("post", make_conv(opts.channels, opts.channels, 3));
    init_fan_in(extract, rng);
    init_fan_in(sigma_head, rng);
    init_fan_in(mu_head, rng);
    init_zero(post);
}

SELNorm::Trace SELNorm::trace(const torch::Tensor& x, const torch::Tensor& heatmaps) {
    Trace t;
    t.resized_heatmaps = prepare_heatmaps(x, heatmaps);
    t.normalized = instance_normalize(x);
    t.features = lrelu(extract(t.resized_heatmaps));
    t.sigma = sigma_head(t.features);
    t.mu = mu_head(t.features);
    t.dx = (1.0 + t.sigma) * t.normalized + t.mu;
    t.output = x + post(lrelu(t.dx)) * opts_.residual_scale;
    return t;
}

torch::Tensor SELNorm::forward(const torch::Tensor& x, const torch::Tensor& heatmaps) {
    return trace(x, heatmaps).output;
}

SELConcat::SELConcat(SELOptions opts, Rng& rng) : SpatialEncodingLayer(opts) {
    extract = register_module("extract", make_conv(opts.heatmap_channels, opts.extract_dim, 3));
    fuse_in = register_module("fuse_in", make_conv(opts.channels + opts.extract_dim, opts.concat_dim, 3));
    fuse_out = register_module("fuse_out", make_conv(opts.concat_dim, opts.channels, 3));
    post = register_module("post", make_conv(opts.channels, opts.channels, 3));
    init_fan_in(extract, rng);
    init_fan_in(fuse_in, rng);
    init_fan_in(fuse_out, rng);
    init_zero(post);
}

torch::Tensor SELConcat::forward(const torch::Tensor& x, const torch::Tensor& heatmaps) {
    auto hm = prepare_heatmaps(x, heatmaps);
    auto features = lrelu(extract(hm));
    auto dx = fuse_out(lrelu(fuse_in(torch::cat({x, features}, 1))));
    return x + post(lrelu(dx)) * opts_.residual_scale;
}

std::shared_ptr<SpatialEncodingLayer> make_sel(SelVariant variant, SELOptions opts, Rng& rng) {
    switch (variant) {
        case SelVariant::norm: return std::make_shared<SELNorm>(opts, rng);
        case SelVariant::concat: return std::make_shared<SELConcat>(opts, rng);
        default: throw ConfigError(std::string("no spatial encoding layer for variant ") + to_string(variant));
    }
}

torch::Tensor flatten_condition(const torch::Tensor& z, const std::vector<torch::Tensor>& level_maps) {
    std::vector<torch::Tensor> parts{z};
    for (const auto& maps : level_maps) {
        if (maps.dim() != 4 || maps.size(0) != z.size(0)) throw ShapeError("flatten_condition: expected [B, n, r, r] maps");
        parts.push_back(maps.sum(1).reshape({z.size(0), -1}).to(z.dtype()));
    }
    return torch::cat(parts, 1);
}

int flatten_suffix_length(const std::vector<int>& resolutions) {
    int n = 0;
    for (int r : resolutions) n += r * r;
    return n;
}

}  // namespace sgan
