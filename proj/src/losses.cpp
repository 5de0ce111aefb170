// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/losses.hpp"

namespace sgan {

namespace F = torch::nn::functional;

torch::Tensor d_adv_loss(const torch::Tensor& scores_real, const torch::Tensor& scores_fake) {
    return F::softplus(-scores_real).mean() + F::softplus(scores_fake).mean();
}

torch::Tensor g_adv_loss(const torch::Tensor& scores_fake) { return F::softplus(-scores_fake).mean(); }

AdvLosses adv_losses(const torch::Tensor& scores_real, const torch::Tensor& scores_fake) {
    return {d_adv_loss(scores_real, scores_fake), g_adv_loss(scores_fake)};
}

torch::Tensor r1_penalty(Critic& critic, const torch::Tensor& x_real, double gamma) {
    if (gamma < 0.0) throw ConfigError("r1 gamma must be nonnegative");
    auto x = x_real.detach().clone().set_requires_grad(true);
    torch::AutoGradMode enable(true);
    return r1_from_scores(critic.evaluate(x).score, x, gamma);
}

torch::Tensor r1_from_scores(const torch::Tensor& scores, const torch::Tensor& x, double gamma) {
    if (gamma < 0.0) throw ConfigError("r1 gamma must be nonnegative");
    if (!scores.requires_grad()) return torch::zeros({}, x.options().requires_grad(false));
    auto grads = torch::autograd::grad({scores.sum()}, {x}, {}, /*retain_graph=*/true, /*create_graph=*/true,
                                       /*allow_unused=*/true);
    if (!grads[0].defined()) return torch::zeros({}, x.options().requires_grad(false));
    auto sq_norm = grads[0].pow(2).flatten(1).sum(1);
    return sq_norm.mean() * (gamma / 2.0);
}

void AlignConfig::validate() const {
    if (tau < 0.0) throw ConfigError("align tau must be nonnegative");
    if (weight < 0.0) throw ConfigError("align weight must be nonnegative");
    if (levels.empty()) throw ConfigError("align levels must not be empty");
    for (int l : levels)
        if (l < 0 || l >= kNumLevels) throw ConfigError("align level out of range");
}

AlignResult alignment_from_maps(const std::vector<torch::Tensor>& attention, const std::vector<torch::Tensor>& targets,
                                const AlignConfig& cfg) {
    if (attention.size() != targets.size() || attention.empty())
        throw ShapeError("alignment: need one attention map and one target per level");
    torch::Tensor total;
    for (std::size_t i = 0; i < attention.size(); ++i) {
        if (!attention[i].sizes().equals(targets[i].sizes()))
            throw ShapeError("alignment: attention and target shapes differ at level index " + std::to_string(i));
        auto per_level = (attention[i] - targets[i].to(attention[i].dtype())).abs().flatten(1).mean(1);
        total = total.defined() ? total + per_level : per_level;
    }
    AlignResult r;
    r.per_sample = total / static_cast<double>(attention.size());
    r.kept = (r.per_sample >= cfg.tau).to(r.per_sample.dtype());
    r.truncated = (r.per_sample * r.kept).mean();
    r.loss = r.truncated * cfg.weight;
    return r;
}

std::vector<torch::Tensor> alignment_targets(const std::vector<HeatmapPyramid>& pyramids, const AlignConfig& cfg,
                                             torch::Dtype dtype) {
    std::vector<torch::Tensor> out;
    for (int l : cfg.levels) {
        std::vector<torch::Tensor> per_sample;
        per_sample.reserve(pyramids.size());
        for (const auto& p : pyramids) per_sample.push_back(level_sum(p.level(l)).clamp(0.0, 1.0));
        out.push_back(torch::stack(per_sample).to(dtype));
    }
    return out;
}

AlignResult alignment_loss_from_output(const CriticOutput& out, const std::vector<torch::Tensor>& targets,
                                       const AlignConfig& cfg) {
    cfg.validate();
    std::vector<std::string> taps;
    for (int l : cfg.levels) {
        auto name = tap_name(level_resolution(l));
        if (!out.taps.count(name))
            throw Error("alignment: critic has no tap '" + name + "' for level " + std::to_string(l));
        taps.push_back(name);
    }
    auto maps = gradcam_from_output(out, taps, {.differentiable = true, .maximize = true});
    std::vector<torch::Tensor> attention;
    for (const auto& name : taps) attention.push_back(normalize_max1(maps.at(name)).values);
    return alignment_from_maps(attention, targets, cfg);
}

AlignResult alignment_loss(Critic& critic, const torch::Tensor& generated, const std::vector<HeatmapPyramid>& pyramids,
                           const AlignConfig& cfg) {
    FrozenParameters frozen(critic.critic_parameters());
    torch::AutoGradMode enable(true);
    auto input = generated.requires_grad() ? generated : generated.detach().clone().set_requires_grad(true);
    auto out = critic.evaluate(input);
    return alignment_loss_from_output(out, alignment_targets(pyramids, cfg, generated.scalar_type()), cfg);
}

}  // namespace sgan
