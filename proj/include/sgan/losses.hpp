// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "sgan/attention.hpp"
#include "sgan/heatmap.hpp"
#include "sgan/nets.hpp"

namespace sgan {

struct AdvLosses {
    torch::Tensor d;  // mean softplus(-s_real) + mean softplus(s_fake)
    torch::Tensor g;  // mean softplus(-s_fake)
};

/// Non-saturating logistic losses on raw scores.
AdvLosses adv_losses(const torch::Tensor& scores_real, const torch::Tensor& scores_fake);
torch::Tensor d_adv_loss(const torch::Tensor& scores_real, const torch::Tensor& scores_fake);
torch::Tensor g_adv_loss(const torch::Tensor& scores_fake);

/// (gamma / 2) * E[ |d score / d x|^2 ] over real samples. The returned
/// tensor keeps its graph so it can be minimized w.r.t. critic parameters.
torch::Tensor r1_penalty(Critic& critic, const torch::Tensor& x_real, double gamma);
/// R1 from an existing forward pass whose input `x` requires grad.
torch::Tensor r1_from_scores(const torch::Tensor& scores, const torch::Tensor& x, double gamma);

struct AlignConfig {
    double tau = 0.25;
    double weight = 1.0;
    std::vector<int> levels{0, 1, 2};

    void validate() const;
};

struct AlignResult {
    torch::Tensor loss;        // scalar: weight * batch mean of truncated per-sample values
    torch::Tensor truncated;   // scalar: the same mean without the weight
    torch::Tensor per_sample;  // [B]: mean over levels of mean |A - T|, before truncation
    torch::Tensor kept;        // [B]: 1 where per_sample >= tau
};

/// Core arithmetic on ready maps. attention[i], targets[i]: [B, r_i, r_i],
/// one entry per configured level.
AlignResult alignment_from_maps(const std::vector<torch::Tensor>& attention, const std::vector<torch::Tensor>& targets,
                                const AlignConfig& cfg);

/// clip(level_sum, 0, 1) per configured level, stacked over the batch.
std::vector<torch::Tensor> alignment_targets(const std::vector<HeatmapPyramid>& pyramids, const AlignConfig& cfg,
                                             torch::Dtype dtype = torch::kFloat32);

/// L_align from a forward pass over generated images. The pass must have
/// been made with critic parameters frozen if the critic is not to receive
/// gradients; the image keeps its graph so the generator does.
AlignResult alignment_loss_from_output(const CriticOutput& out, const std::vector<torch::Tensor>& targets,
                                       const AlignConfig& cfg);

/// Full L_align: freezes the critic's parameters, runs GradCAM on the
/// resolution-matched taps, and compares with the pyramids' targets.
AlignResult alignment_loss(Critic& critic, const torch::Tensor& generated, const std::vector<HeatmapPyramid>& pyramids,
                           const AlignConfig& cfg);

}  // namespace sgan
