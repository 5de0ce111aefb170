// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

// Hand-built critics whose GradCAM maps and input gradients are known in
// closed form.

#pragma once

#include <functional>

#include "sgan/nets.hpp"

namespace oracles {

/// Critic defined by two closures: the tap (from the input) and the score
/// (from the tap). The tap is registered under `name`.
class LambdaCritic : public sgan::Critic {
public:
    using TapFn = std::function<torch::Tensor(const torch::Tensor&)>;
    using ScoreFn = std::function<torch::Tensor(const torch::Tensor& x, const torch::Tensor& tap)>;

    LambdaCritic(std::string name, TapFn tap, ScoreFn score, std::vector<torch::Tensor> params = {})
        : name_(std::move(name)), tap_(std::move(tap)), score_(std::move(score)), params_(std::move(params)) {}

    sgan::CriticOutput evaluate(const torch::Tensor& x) override {
        sgan::CriticOutput out;
        auto a = tap_(x);
        out.taps[name_] = a;
        out.score = score_(x, a);
        return out;
    }
    std::vector<torch::Tensor> critic_parameters() override { return params_; }

private:
    std::string name_;
    TapFn tap_;
    ScoreFn score_;
    std::vector<torch::Tensor> params_;
};

/// score = lambda * spatial mean of a single nonnegative channel relu(x[:,0]).
inline LambdaCritic channel_mean_critic(double lambda = 1.0) {
    return LambdaCritic(
        "A", [](const torch::Tensor& x) { return torch::relu(x.narrow(1, 0, 1)); },
        [lambda](const torch::Tensor&, const torch::Tensor& a) { return lambda * a.mean({1, 2, 3}); });
}

/// Tap with four channels, channel k = relu(x) restricted to quadrant k
/// (TL, TR, BL, BR); the score reads channel 0 only.
inline LambdaCritic quadrant_critic() {
    return LambdaCritic(
        "A",
        [](const torch::Tensor& x) {
            auto r = torch::relu(x.narrow(1, 0, 1));
            const auto h = x.size(2), w = x.size(3);
            std::vector<torch::Tensor> ch;
            for (int q = 0; q < 4; ++q) {
                auto mask = torch::zeros({1, 1, h, w}, x.options());
                using torch::indexing::Slice;
                const auto ys = (q / 2 == 0) ? Slice(0, h / 2) : Slice(h / 2, h);
                const auto xs = (q % 2 == 0) ? Slice(0, w / 2) : Slice(w / 2, w);
                mask.index_put_({0, 0, ys, xs}, 1.0);
                ch.push_back(r * mask);
            }
            return torch::cat(ch, 1);
        },
        [](const torch::Tensor&, const torch::Tensor& a) { return a.narrow(1, 0, 1).mean({1, 2, 3}); });
}

/// Index (0..3, TL/TR/BL/BR) of the quadrant whose occlusion drops the
/// score most.
inline int occlusion_peak_quadrant(sgan::Critic& critic, const torch::Tensor& x) {
    torch::NoGradGuard ng;
    const double base = critic.evaluate(x).score.sum().item<double>();
    const auto h = x.size(2), w = x.size(3);
    int best = -1;
    double best_drop = -1e300;
    for (int q = 0; q < 4; ++q) {
        auto xo = x.clone();
        using torch::indexing::Slice;
        const auto ys = (q / 2 == 0) ? Slice(0, h / 2) : Slice(h / 2, h);
        const auto xs = (q % 2 == 0) ? Slice(0, w / 2) : Slice(w / 2, w);
        xo.index_put_({Slice(), Slice(), ys, xs}, 0.0);
        const double drop = base - critic.evaluate(xo).score.sum().item<double>();
        if (drop > best_drop) best_drop = drop, best = q;
    }
    return best;
}

/// Fraction of the map's mass (per sample, averaged) in quadrant q.
inline double quadrant_mass(const torch::Tensor& map, int q) {  // map [B, h, w]
    const auto h = map.size(1), w = map.size(2);
    using torch::indexing::Slice;
    const auto ys = (q / 2 == 0) ? Slice(0, h / 2) : Slice(h / 2, h);
    const auto xs = (q % 2 == 0) ? Slice(0, w / 2) : Slice(w / 2, w);
    auto part = map.index({Slice(), ys, xs}).sum({1, 2});
    return (part / (map.sum({1, 2}) + 1e-30)).mean().item<double>();
}

}  // namespace oracles
