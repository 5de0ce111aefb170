// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/nets.hpp"

#include <algorithm>

#include "sgan/layers.hpp"

namespace sgan {

namespace F = torch::nn::functional;

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

int channels_at(int res, int channel_max) { return std::clamp(channel_max * 8 / res, 16, channel_max); }

std::string tap_name(int res) { return "r" + std::to_string(res); }

void GeneratorSpec::validate() const {
    if (base_res < 16 || !is_power_of_two(base_res)) throw ConfigError("generator base_res must be a power of two >= 16");
    if (latent_dim < 1) throw ConfigError("latent_dim must be positive");
    if (out_channels != 1 && out_channels != 3) throw ConfigError("out_channels must be 1 or 3");
    for (int l : sel_levels)
        if (l < 0 || l >= kNumLevels) throw ConfigError("sel level out of range");
}

Generator::Generator(GeneratorSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    const int c4 = channels_at(4, spec_.channel_max);
    int in_dim = spec_.latent_dim;
    if (spec_.sel_variant == SelVariant::flatten) {
        std::vector<int> rs;
        for (int l = 0; l < kNumLevels; ++l) rs.push_back(level_resolution(l));
        in_dim += flatten_suffix_length(rs);
    }
    fc = register_module("fc", torch::nn::Linear(in_dim, c4 * 16));
    conv4 = register_module("conv4", make_conv(c4, c4, 3));
    init_fan_in(fc, rng);
    init_fan_in(conv4, rng);
    int prev = c4;
    for (int res = 8; res <= spec_.base_res; res *= 2) {
        const int ch = channels_at(res, spec_.channel_max);
        up_a.push_back(register_module("up" + std::to_string(res) + "_a", make_conv(prev, ch, 3)));
        up_b.push_back(register_module("up" + std::to_string(res) + "_b", make_conv(ch, ch, 3)));
        init_fan_in(up_a.back(), rng);
        init_fan_in(up_b.back(), rng);
        prev = ch;
    }
    to_img = register_module("to_img", make_conv(prev, spec_.out_channels, 1));
    init_fan_in(to_img, rng);

    sels_.resize(kNumLevels);
    if (spec_.sel_variant == SelVariant::norm || spec_.sel_variant == SelVariant::concat) {
        for (int l : spec_.sel_levels) {
            SELOptions o;
            o.resolution = level_resolution(l);
            o.channels = channels_at(o.resolution, spec_.channel_max);
            o.heatmap_channels = spec_.heatmap_counts[static_cast<std::size_t>(l)];
            sels_[static_cast<std::size_t>(l)] =
                register_module("sel" + std::to_string(l), make_sel(spec_.sel_variant, o, rng));
        }
    }
}

std::shared_ptr<SpatialEncodingLayer> Generator::sel_at(int level) const {
    return sels_.at(static_cast<std::size_t>(level));
}

torch::Tensor Generator::forward(const torch::Tensor& z, const std::vector<torch::Tensor>& level_maps) {
    if (z.dim() != 2 || z.size(1) != spec_.latent_dim)
        throw ShapeError("generator: expected latent of shape [B, " + std::to_string(spec_.latent_dim) + "]");
    const bool uses_maps = spec_.sel_variant != SelVariant::none;
    if (uses_maps) {
        if (level_maps.size() != static_cast<std::size_t>(kNumLevels))
            throw ShapeError("generator: expected heatmaps for 3 levels");
        for (int l = 0; l < kNumLevels; ++l) {
            const auto& m = level_maps[static_cast<std::size_t>(l)];
            const int r = level_resolution(l);
            if (m.dim() != 4 || m.size(0) != z.size(0) || m.size(2) != r || m.size(3) != r)
                throw ShapeError("generator: level " + std::to_string(l) + " heatmaps must be [B, n, " +
                                 std::to_string(r) + ", " + std::to_string(r) + "]");
            if (m.size(1) != spec_.heatmap_counts[static_cast<std::size_t>(l)])
                throw ShapeError("generator: level " + std::to_string(l) + " has the wrong number of sub-heatmaps");
        }
    }
    const auto batch = z.size(0);
    const int c4 = channels_at(4, spec_.channel_max);
    auto input = spec_.sel_variant == SelVariant::flatten ? flatten_condition(z, level_maps) : z;
    auto x = pixel_normalize(lrelu(fc(input)).view({batch, c4, 4, 4}));
    x = pixel_normalize(lrelu(conv4(x)));
    if (sels_[0]) x = sels_[0]->forward(x, level_maps[0]);
    int level = 1;
    for (std::size_t i = 0; i < up_a.size(); ++i, ++level) {
        x = F::interpolate(x, F::InterpolateFuncOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest));
        x = pixel_normalize(lrelu(up_a[i](x)));
        x = pixel_normalize(lrelu(up_b[i](x)));
        if (level < kNumLevels && sels_[static_cast<std::size_t>(level)])
            x = sels_[static_cast<std::size_t>(level)]->forward(x, level_maps[static_cast<std::size_t>(level)]);
    }
    return torch::tanh(to_img(x));
}

torch::Tensor generate(Generator& g, const torch::Tensor& z, const std::vector<HeatmapPyramid>& pyramids) {
    if (g.spec().sel_variant == SelVariant::none) return g.forward(z, {});
    if (static_cast<std::int64_t>(pyramids.size()) != z.size(0))
        throw ShapeError("generate: one pyramid per latent row required");
    return g.forward(z, stack_levels(pyramids, z.scalar_type()));
}

void DiscriminatorSpec::validate() const {
    if (base_res < 8 || !is_power_of_two(base_res)) throw ConfigError("discriminator base_res must be a power of two >= 8");
    if (in_channels != 1 && in_channels != 3) throw ConfigError("in_channels must be 1 or 3");
    for (int r : tap_resolutions)
        if (r < 4 || r > base_res || !is_power_of_two(r)) throw ConfigError("tap resolution out of range");
}

Discriminator::Discriminator(DiscriminatorSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    int prev = channels_at(spec_.base_res, spec_.channel_max);
    from_img = register_module("from_img", make_conv(spec_.in_channels, prev, 1));
    init_fan_in(from_img, rng);
    for (int res = spec_.base_res; res >= 4; res /= 2) {
        const int ch = channels_at(res, spec_.channel_max);
        torch::nn::Conv2d conv = register_module("conv" + std::to_string(res), make_conv(prev, ch, 3));
        init_fan_in(conv, rng);
        blocks_.emplace_back(res, conv);
        prev = ch;
    }
    fc = register_module("fc", torch::nn::Linear(prev * 16, prev));
    out = register_module("out", torch::nn::Linear(prev, 1));
    init_fan_in(fc, rng);
    init_fan_in(out, rng);
}

CriticOutput Discriminator::evaluate(const torch::Tensor& x) {
    if (x.dim() != 4 || x.size(1) != spec_.in_channels || x.size(2) != spec_.base_res || x.size(3) != spec_.base_res)
        throw ShapeError("discriminator: expected [B, " + std::to_string(spec_.in_channels) + ", " +
                         std::to_string(spec_.base_res) + ", " + std::to_string(spec_.base_res) + "] input");
    CriticOutput result;
    auto h = lrelu(from_img(x));
    for (auto& [res, conv] : blocks_) {
        h = lrelu(conv(h));
        if (std::find(spec_.tap_resolutions.begin(), spec_.tap_resolutions.end(), res) != spec_.tap_resolutions.end())
            result.taps.emplace(tap_name(res), h);
        if (res > 4) h = F::avg_pool2d(h, F::AvgPool2dFuncOptions(2));
    }
    h = lrelu(fc(h.flatten(1)));
    result.score = out(h).squeeze(1);
    return result;
}

void copy_matching_parameters(torch::nn::Module& dst, const torch::nn::Module& src) {
    torch::NoGradGuard guard;
    auto src_params = src.named_parameters(true);
    for (auto& p : dst.named_parameters(true)) {
        if (const auto* s = src_params.find(p.key())) p.value().copy_(*s);
    }
    auto src_buffers = src.named_buffers(true);
    for (auto& b : dst.named_buffers(true)) {
        if (const auto* s = src_buffers.find(b.key())) b.value().copy_(*s);
    }
}

FrozenParameters::FrozenParameters(std::vector<torch::Tensor> params) : params_(std::move(params)) {
    for (auto& p : params_) {
        previous_.push_back(p.requires_grad());
        p.set_requires_grad(false);
    }
}

FrozenParameters::~FrozenParameters() {
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i].set_requires_grad(previous_[i]);
}

}  // namespace sgan
