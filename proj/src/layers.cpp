// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/layers.hpp"

#include <cmath>

namespace sgan {

namespace F = torch::nn::functional;

torch::Tensor lrelu(const torch::Tensor& x) { return torch::leaky_relu(x, kLeakySlope); }

torch::Tensor pixel_normalize(const torch::Tensor& x, double eps) {
    return x * torch::rsqrt(x.pow(2).mean(1, /*keepdim=*/true) + eps);
}

torch::Tensor instance_normalize(const torch::Tensor& x, double eps) {
    auto mean = x.mean({2, 3}, /*keepdim=*/true);
    auto var = (x - mean).pow(2).mean({2, 3}, /*keepdim=*/true);
    return (x - mean) / torch::sqrt(var + eps);
}

torch::nn::Conv2d make_conv(int in, int out, int kernel) {
    return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, kernel).padding(kernel / 2).bias(true));
}

namespace {

void fill_fan_in(torch::Tensor& weight, std::int64_t fan_in, Rng& rng) {
    const double gain = std::sqrt(2.0 / (1.0 + kLeakySlope * kLeakySlope));
    const double stddev = gain / std::sqrt(static_cast<double>(fan_in));
    torch::NoGradGuard guard;
    weight.copy_(rng.randn(weight.sizes(), torch::kFloat64).mul_(stddev).to(weight.dtype()));
}

}  // namespace

void init_fan_in(torch::nn::Conv2d& conv, Rng& rng) {
    auto& w = conv->weight;
    fill_fan_in(w, w.size(1) * w.size(2) * w.size(3), rng);
    torch::NoGradGuard guard;
    conv->bias.zero_();
}

void init_fan_in(torch::nn::Linear& lin, Rng& rng) {
    auto& w = lin->weight;
    fill_fan_in(w, w.size(1), rng);
    torch::NoGradGuard guard;
    lin->bias.zero_();
}

void init_zero(torch::nn::Conv2d& conv) {
    torch::NoGradGuard guard;
    conv->weight.zero_();
    conv->bias.zero_();
}

}  // namespace sgan
