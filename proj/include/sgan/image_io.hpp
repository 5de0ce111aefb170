// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "sgan/common.hpp"

namespace sgan {

/// [C, H, W] image in [-1, 1] (C = 1 or 3) to 8-bit PNG bytes.
std::string encode_png(const torch::Tensor& image);
void write_png(const std::string& path, const torch::Tensor& image);

/// [H, W] map in [0, 1] rendered as a colour-mapped [3, size, size] image.
torch::Tensor colorize_map(const torch::Tensor& map, int size);

/// Bilinearly upsamples `map` to the image size and alpha-blends its
/// colour-mapped version over the image. Output [3, H, W] in [-1, 1].
torch::Tensor overlay_attention(const torch::Tensor& image, const torch::Tensor& map, double alpha = 0.5);

/// Tiles [N, C, H, W] images row-major into a single [C, rows*H + pad, ...] image.
torch::Tensor make_grid(const torch::Tensor& images, int rows, int cols, int pad = 2);

}  // namespace sgan
