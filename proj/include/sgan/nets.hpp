// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sgan/common.hpp"
#include "sgan/heatmap.hpp"
#include "sgan/sel.hpp"

namespace sgan {

/// Feature width at a given resolution: wide at 4x4, narrowing with size.
int channels_at(int res, int channel_max);

/// Name of the discriminator tap recorded at resolution `res`.
std::string tap_name(int res);

/// Generator level l wraps the feature map of side 4 * 2^l.
inline int level_resolution(int level) { return 4 << level; }

struct GeneratorSpec {
    int latent_dim = 64;
    int base_res = 32;
    int out_channels = 1;
    int channel_max = 64;
    SelVariant sel_variant = SelVariant::norm;
    std::vector<int> sel_levels{0, 1, 2};
    std::array<int, kNumLevels> heatmap_counts{1, 2, 4};

    void validate() const;
};

/// Plain upsample+conv generator with optional spatial encoding layers on
/// the 4/8/16 feature maps. Output is tanh, in [-1, 1].
class Generator : public torch::nn::Module {
public:
    Generator(GeneratorSpec spec, Rng& rng);

    /// z: [B, latent_dim]; level_maps[l]: [B, n_l, 4*2^l, 4*2^l] (ignored when
    /// the variant is none).
    torch::Tensor forward(const torch::Tensor& z, const std::vector<torch::Tensor>& level_maps);

    const GeneratorSpec& spec() const { return spec_; }
    /// Spatial encoding layer wrapping level l, or nullptr.
    std::shared_ptr<SpatialEncodingLayer> sel_at(int level) const;

private:
    GeneratorSpec spec_;
    torch::nn::Linear fc{nullptr};
    torch::nn::Conv2d conv4{nullptr};
    std::vector<torch::nn::Conv2d> up_a;
    std::vector<torch::nn::Conv2d> up_b;
    torch::nn::Conv2d to_img{nullptr};
    std::vector<std::shared_ptr<SpatialEncodingLayer>> sels_;  // indexed by level, may hold nullptr
};

/// Batched generation from a list of pyramids (one per latent row).
torch::Tensor generate(Generator& g, const torch::Tensor& z, const std::vector<HeatmapPyramid>& pyramids);

struct CriticOutput {
    torch::Tensor score;                          // [B], pre-sigmoid
    std::map<std::string, torch::Tensor> taps;    // name -> [B, K, h, w]
};

/// Anything that scores images and exposes intermediate activations.
class Critic {
public:
    virtual ~Critic() = default;
    virtual CriticOutput evaluate(const torch::Tensor& x) = 0;
    virtual std::vector<torch::Tensor> critic_parameters() = 0;
};

struct DiscriminatorSpec {
    int base_res = 32;
    int in_channels = 1;
    int channel_max = 64;
    std::vector<int> tap_resolutions{16, 8, 4};

    void validate() const;
};

/// Conv stack base_res -> 4 with average-pool downsampling and a dense head.
/// Taps are post-activation maps recorded before each downsample.
class Discriminator : public torch::nn::Module, public Critic {
public:
    Discriminator(DiscriminatorSpec spec, Rng& rng);

    CriticOutput evaluate(const torch::Tensor& x) override;
    std::vector<torch::Tensor> critic_parameters() override { return parameters(); }
    torch::Tensor forward(const torch::Tensor& x) { return evaluate(x).score; }

    const DiscriminatorSpec& spec() const { return spec_; }

private:
    DiscriminatorSpec spec_;
    torch::nn::Conv2d from_img{nullptr};
    std::vector<std::pair<int, torch::nn::Conv2d>> blocks_;  // (resolution, conv), high to low
    torch::nn::Linear fc{nullptr};
    torch::nn::Linear out{nullptr};
};

/// Copies every parameter/buffer of `src` whose name exists in `dst`.
void copy_matching_parameters(torch::nn::Module& dst, const torch::nn::Module& src);

/// Turns off requires_grad on a parameter set for the guard's lifetime.
class FrozenParameters {
public:
    explicit FrozenParameters(std::vector<torch::Tensor> params);
    ~FrozenParameters();
    FrozenParameters(const FrozenParameters&) = delete;
    FrozenParameters& operator=(const FrozenParameters&) = delete;

private:
    std::vector<torch::Tensor> params_;
    std::vector<bool> previous_;
};

}  // namespace sgan
