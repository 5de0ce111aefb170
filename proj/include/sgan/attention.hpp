// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgan/nets.hpp"

namespace sgan {

enum class AttentionNorm { raw, max1 };

/// GradCAM maps for a batch at one tap: values [B, h, w], nonnegative.
struct AttentionMap {
    int resolution = 0;
    torch::Tensor values;
    std::string tap;
    AttentionNorm norm = AttentionNorm::raw;
};

struct GradCamOptions {
    /// Keep the graph so a loss on the map can backpropagate into the input.
    bool differentiable = false;
    /// Gradients of +score (true) or -score (false).
    bool maximize = true;
};

/// Channel weights are the spatial mean of d(score)/d(activation); the map
/// is ReLU(sum_k w_k A_k). Uses autograd::grad against the tap activations
/// only, so no parameter .grad is ever touched.
AttentionMap gradcam(Critic& critic, const torch::Tensor& x, const std::string& tap, GradCamOptions opts = {});

/// Several taps from one forward pass.
std::map<std::string, AttentionMap> gradcam_taps(Critic& critic, const torch::Tensor& x,
                                                 const std::vector<std::string>& taps, GradCamOptions opts = {});

/// Same as gradcam_taps but reuses an existing forward pass; `out.score`
/// must still have its graph.
std::map<std::string, AttentionMap> gradcam_from_output(const CriticOutput& out, const std::vector<std::string>& taps,
                                                        GradCamOptions opts = {});

inline constexpr double kMax1Eps = 1e-8;

/// Per-sample division by (max + eps); an all-zero map stays zero.
AttentionMap normalize_max1(const AttentionMap& map, double eps = kMax1Eps);

}  // namespace sgan
