// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/attention.hpp"

namespace sgan {

std::map<std::string, AttentionMap> gradcam_from_output(const CriticOutput& out, const std::vector<std::string>& taps,
                                                        GradCamOptions opts) {
    std::vector<torch::Tensor> activations;
    for (const auto& name : taps) {
        auto it = out.taps.find(name);
        if (it == out.taps.end()) throw Error("gradcam: unknown tap '" + name + "'");
        if (!it->second.requires_grad()) throw Error("gradcam: tap '" + name + "' is not connected to the score graph");
        activations.push_back(it->second);
    }
    auto objective = opts.maximize ? out.score.sum() : -out.score.sum();
    auto grads = torch::autograd::grad({objective}, activations, /*grad_outputs=*/{}, /*retain_graph=*/true,
                                       /*create_graph=*/opts.differentiable, /*allow_unused=*/true);
    std::map<std::string, AttentionMap> result;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const auto& a = activations[i];
        auto g = grads[i].defined() ? grads[i] : torch::zeros_like(a);
        auto weights = g.mean({2, 3}, /*keepdim=*/true);
        auto values = torch::relu((weights * a).sum(1));
        if (!opts.differentiable) values = values.detach();
        result.emplace(taps[i], AttentionMap{static_cast<int>(a.size(2)), values, taps[i], AttentionNorm::raw});
    }
    return result;
}

std::map<std::string, AttentionMap> gradcam_taps(Critic& critic, const torch::Tensor& x,
                                                 const std::vector<std::string>& taps, GradCamOptions opts) {
    torch::Tensor input = x;
    if (!opts.differentiable) input = x.detach().clone().set_requires_grad(true);
    torch::AutoGradMode enable(true);
    auto out = critic.evaluate(input);
    return gradcam_from_output(out, taps, opts);
}

AttentionMap gradcam(Critic& critic, const torch::Tensor& x, const std::string& tap, GradCamOptions opts) {
    return gradcam_taps(critic, x, {tap}, opts).at(tap);
}

AttentionMap normalize_max1(const AttentionMap& map, double eps) {
    AttentionMap out = map;
    auto peak = std::get<0>(map.values.flatten(1).max(1)).view({-1, 1, 1});
    out.values = map.values / (peak + eps);
    out.norm = AttentionNorm::max1;
    return out;
}

}  // namespace sgan
