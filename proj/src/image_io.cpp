// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/image_io.hpp"

#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace sgan {

namespace F = torch::nn::functional;

namespace {

cv::Mat to_mat_u8(const torch::Tensor& image) {
    if (image.dim() != 3 || (image.size(0) != 1 && image.size(0) != 3))
        throw ShapeError("expected a [1|3, H, W] image");
    auto u8 = ((image.detach().to(torch::kFloat32).clamp(-1.0, 1.0) + 1.0) * 127.5)
                  .round()
                  .to(torch::kUInt8)
                  .permute({1, 2, 0})
                  .contiguous();
    const int h = static_cast<int>(u8.size(0));
    const int w = static_cast<int>(u8.size(1));
    const int c = static_cast<int>(u8.size(2));
    cv::Mat m(h, w, c == 3 ? CV_8UC3 : CV_8UC1, u8.data_ptr<std::uint8_t>());
    cv::Mat out = m.clone();
    if (c == 3) cv::cvtColor(out, out, cv::COLOR_RGB2BGR);
    return out;
}

}  // namespace

std::string encode_png(const torch::Tensor& image) {
    std::vector<unsigned char> buf;
    if (!cv::imencode(".png", to_mat_u8(image), buf)) throw Error("PNG encoding failed");
    return {buf.begin(), buf.end()};
}

void write_png(const std::string& path, const torch::Tensor& image) {
    const auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

torch::Tensor colorize_map(const torch::Tensor& map, int size) {
    auto m = map.detach().to(torch::kFloat32).clamp(0.0, 1.0).view({1, 1, map.size(0), map.size(1)});
    m = F::interpolate(m, F::InterpolateFuncOptions()
                              .size(std::vector<int64_t>{size, size})
                              .mode(torch::kBilinear)
                              .align_corners(true));
    auto u8 = (m.view({size, size}) * 255.0).round().to(torch::kUInt8).contiguous();
    cv::Mat gray(size, size, CV_8UC1, u8.data_ptr<std::uint8_t>());
    cv::Mat colored;
    cv::applyColorMap(gray, colored, cv::COLORMAP_JET);
    cv::cvtColor(colored, colored, cv::COLOR_BGR2RGB);
    auto t = torch::from_blob(colored.data, {size, size, 3}, torch::kUInt8).clone();
    return t.permute({2, 0, 1}).to(torch::kFloat32) / 127.5 - 1.0;
}

torch::Tensor overlay_attention(const torch::Tensor& image, const torch::Tensor& map, double alpha) {
    const auto h = image.size(1);
    auto base = image.detach().to(torch::kFloat32);
    if (base.size(0) == 1) base = base.expand({3, h, image.size(2)});
    auto heat = colorize_map(map, static_cast<int>(h));
    return (1.0 - alpha) * base + alpha * heat;
}

torch::Tensor make_grid(const torch::Tensor& images, int rows, int cols, int pad) {
    if (images.dim() != 4 || images.size(0) != static_cast<std::int64_t>(rows) * cols)
        throw ShapeError("make_grid: image count does not match rows x cols");
    const auto c = images.size(1);
    const auto h = images.size(2);
    const auto w = images.size(3);
    auto grid = torch::full({c, rows * (h + pad) + pad, cols * (w + pad) + pad}, -1.0f);
    for (int r = 0; r < rows; ++r) {
        for (int col = 0; col < cols; ++col) {
            const auto y0 = pad + r * (h + pad);
            const auto x0 = pad + col * (w + pad);
            grid.slice(1, y0, y0 + h).slice(2, x0, x0 + w).copy_(images[r * cols + col].to(torch::kFloat32));
        }
    }
    return grid;
}

}  // namespace sgan
