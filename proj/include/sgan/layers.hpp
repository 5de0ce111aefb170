// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgan/common.hpp"

namespace sgan {

/// Instance-norm stabilizer: x_hat = (x - mean) / sqrt(var + eps), biased var.
inline constexpr double kInstanceNormEps = 1e-5;

torch::Tensor lrelu(const torch::Tensor& x);

/// Per-sample, per-channel spatial standardization without affine terms.
/// Rescales each pixel's feature vector to unit RMS over channels.
torch::Tensor pixel_normalize(const torch::Tensor& x, double eps = 1e-8);

torch::Tensor instance_normalize(const torch::Tensor& x, double eps = kInstanceNormEps);

/// Same-padding conv with bias.
torch::nn::Conv2d make_conv(int in, int out, int kernel);

/// Fan-in-scaled normal weights, zero bias.
void init_fan_in(torch::nn::Conv2d& conv, Rng& rng);
void init_fan_in(torch::nn::Linear& lin, Rng& rng);
void init_zero(torch::nn::Conv2d& conv);

}  // namespace sgan
