// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace sgan {

void BlobSpec::validate() const {
    if (res < 8) throw ConfigError("blob res must be at least 8");
    if (!(blob_std > 0.0)) throw ConfigError("blob_std must be positive");
    if (margin < 0.0 || 2.0 * margin >= res - 1) throw ConfigError("blob margin leaves no room for centers");
    if (intensity < 0.0 || intensity > 1.0) throw ConfigError("blob intensity must be in [0, 1]");
    if (noise_std < 0.0) throw ConfigError("blob noise_std must be nonnegative");
}

torch::Tensor render_blob(const BlobSpec& spec, PixelCoord center, Rng& rng) {
    const double lo = spec.margin;
    const double hi = spec.res - 1 - spec.margin;
    if (center.x < lo || center.x > hi || center.y < lo || center.y > hi)
        throw Error("render_blob: center outside the margins");
    auto img = torch::empty({1, spec.res, spec.res}, torch::kFloat32);
    auto acc = img.accessor<float, 3>();
    std::normal_distribution<double> noise(0.0, spec.noise_std > 0.0 ? spec.noise_std : 1.0);
    const double two_var = 2.0 * spec.blob_std * spec.blob_std;
    for (int i = 0; i < spec.res; ++i) {
        for (int j = 0; j < spec.res; ++j) {
            const double d2 = (i - center.y) * (i - center.y) + (j - center.x) * (j - center.x);
            double v = -1.0 + 2.0 * spec.intensity * std::exp(-d2 / two_var);
            if (spec.noise_std > 0.0) v += noise(rng.engine());
            acc[0][i][j] = static_cast<float>(std::clamp(v, -1.0, 1.0));
        }
    }
    return img;
}

PixelCoord sample_blob_center(const BlobSpec& spec, Rng& rng) {
    PixelCoord c;
    c.x = rng.uniform(spec.margin, spec.res - 1 - spec.margin);
    c.y = rng.uniform(spec.margin, spec.res - 1 - spec.margin);
    return c;
}

PixelCoord blob_centroid(const torch::Tensor& image) {
    auto v = image.detach().to(torch::kFloat64);
    if (v.dim() == 3) v = v.mean(0);
    if (v.dim() != 2) throw ShapeError("blob_centroid: expected [C, H, W] or [H, W]");
    v = (v + 1.0) * 0.5;
    auto w = torch::relu(v - v.mean());
    const double total = w.sum().item<double>();
    const auto h = v.size(0);
    const auto wd = v.size(1);
    if (total <= 0.0) return {(h - 1) / 2.0, (wd - 1) / 2.0};
    auto ys = torch::arange(h, torch::kFloat64).view({-1, 1});
    auto xs = torch::arange(wd, torch::kFloat64).view({1, -1});
    return {(w * ys).sum().item<double>() / total, (w * xs).sum().item<double>() / total};
}

BlobSource::BlobSource(BlobSpec spec) : spec_(spec) { spec_.validate(); }

torch::Tensor BlobSource::sample_batch(int batch, Rng& rng) {
    std::vector<torch::Tensor> imgs;
    imgs.reserve(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) imgs.push_back(render_blob(spec_, sample_blob_center(spec_, rng), rng));
    return torch::stack(imgs);
}

namespace {

torch::Tensor to_tensor(const cv::Mat& rgb) {
    cv::Mat f;
    rgb.convertTo(f, CV_32FC3, 2.0 / 255.0, -1.0);
    auto t = torch::from_blob(f.data, {f.rows, f.cols, 3}, torch::kFloat32).clone();
    return t.permute({2, 0, 1}).contiguous();
}

}  // namespace

std::optional<torch::Tensor> read_image(const std::string& path, int res, int channels) {
    if (channels != 1 && channels != 3) throw ShapeError("read_image: channels must be 1 or 3");
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) return std::nullopt;
    const int side = std::min(bgr.rows, bgr.cols);
    cv::Mat crop = bgr(cv::Rect((bgr.cols - side) / 2, (bgr.rows - side) / 2, side, side));
    cv::Mat resized;
    cv::resize(crop, resized, cv::Size(res, res), 0, 0, side > res ? cv::INTER_AREA : cv::INTER_LINEAR);
    cv::Mat rgb;
    cv::cvtColor(resized, rgb, cv::COLOR_BGR2RGB);
    auto t = to_tensor(rgb);
    return channels == 3 ? t : t.mean(0, /*keepdim=*/true);
}

ImageFolder load_image_folder(const std::string& path, int res, bool flip) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(path)) throw Error("image folder '" + path + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
        if (!e.is_regular_file()) continue;
        auto ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    ImageFolder out;
    for (const auto& f : files) {
        auto t = read_image(f.string(), res);
        if (!t) {
            ++out.skipped;
            continue;
        }
        out.images.push_back(*t);
        if (flip) out.images.push_back(t->flip({2}));
    }
    if (out.skipped > 0) std::cerr << "warning: skipped " << out.skipped << " unreadable image(s) in " << path << "\n";
    return out;
}

FolderSource::FolderSource(ImageFolder folder) : folder_(std::move(folder)) {
    if (folder_.images.empty()) throw Error("image folder contains no usable images");
}

int FolderSource::resolution() const { return static_cast<int>(folder_.images.front().size(1)); }

torch::Tensor FolderSource::sample_batch(int batch, Rng& rng) {
    std::vector<torch::Tensor> imgs;
    for (int i = 0; i < batch; ++i) {
        if (cursor_ >= order_.size()) {
            order_.resize(folder_.images.size());
            std::iota(order_.begin(), order_.end(), std::size_t{0});
            std::shuffle(order_.begin(), order_.end(), rng.engine());
            cursor_ = 0;
        }
        imgs.push_back(folder_.images[order_[cursor_++]]);
    }
    return torch::stack(imgs);
}

torch::Tensor FolderSource::draw_independent(int n, Rng& rng) {
    std::vector<torch::Tensor> imgs;
    for (int i = 0; i < n; ++i) imgs.push_back(folder_.images[rng.index(folder_.images.size())]);
    return torch::stack(imgs);
}

std::string FolderSource::state() const {
    std::string out = std::to_string(cursor_);
    for (auto i : order_) out += "," + std::to_string(i);
    return out;
}

void FolderSource::set_state(const std::string& s) {
    std::vector<std::size_t> values;
    std::size_t pos = 0;
    while (pos <= s.size() && !s.empty()) {
        auto next = s.find(',', pos);
        values.push_back(std::stoull(s.substr(pos, next - pos)));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (values.empty()) throw Error("corrupt folder iteration state");
    cursor_ = values.front();
    order_.assign(values.begin() + 1, values.end());
    for (auto i : order_)
        if (i >= folder_.images.size()) throw Error("folder iteration state does not match the dataset");
}

}  // namespace sgan
