// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgan/common.hpp"
#include "sgan/heatmap.hpp"

namespace sgan {

/// Synthetic dataset: one Gaussian blob per image on a dark background.
struct BlobSpec {
    int res = 32;
    double blob_std = 3.0;   // pixels
    double margin = 6.0;     // centers uniform in [margin, res - 1 - margin]
    double intensity = 1.0;  // peak above background, in [0, 1]
    double noise_std = 0.02;

    void validate() const;
};

/// [1, res, res] image in [-1, 1]; throws if the center is outside the margins.
torch::Tensor render_blob(const BlobSpec& spec, PixelCoord center, Rng& rng);

/// Uniform center inside the margins (x drawn first).
PixelCoord sample_blob_center(const BlobSpec& spec, Rng& rng);

/// Center of mass of above-mean intensity; accepts [C, H, W] or [H, W].
PixelCoord blob_centroid(const torch::Tensor& image);

/// Source of training batches.
class ImageSource {
public:
    virtual ~ImageSource() = default;
    /// [B, C, res, res] in [-1, 1].
    virtual torch::Tensor sample_batch(int batch, Rng& rng) = 0;
    /// Draws that leave the iteration state alone (evaluation pools).
    virtual torch::Tensor draw_independent(int n, Rng& rng) = 0;
    virtual int channels() const = 0;
    virtual int resolution() const = 0;
    /// Iteration state for checkpointing; stateless sources return "".
    virtual std::string state() const { return {}; }
    virtual void set_state(const std::string&) {}
};

class BlobSource : public ImageSource {
public:
    explicit BlobSource(BlobSpec spec);
    torch::Tensor sample_batch(int batch, Rng& rng) override;
    torch::Tensor draw_independent(int n, Rng& rng) override { return sample_batch(n, rng); }
    int channels() const override { return 1; }
    int resolution() const override { return spec_.res; }
    const BlobSpec& spec() const { return spec_; }

private:
    BlobSpec spec_;
};

struct ImageFolder {
    std::vector<torch::Tensor> images;  // each [3, res, res]
    int skipped = 0;                    // unreadable or undecodable files
};

/// Loads PNG/JPEG files (sorted by name), center-crops to square and
/// resizes to res. With `flip`, each image is followed by its mirror.
/// Center-cropped, resized image in [-1, 1] as [channels, res, res]; nullopt
/// when the file cannot be decoded. One channel averages RGB.
std::optional<torch::Tensor> read_image(const std::string& path, int res, int channels = 3);

ImageFolder load_image_folder(const std::string& path, int res, bool flip = false);

/// Epoch-shuffled sampling over a loaded folder.
class FolderSource : public ImageSource {
public:
    explicit FolderSource(ImageFolder folder);
    torch::Tensor sample_batch(int batch, Rng& rng) override;
    torch::Tensor draw_independent(int n, Rng& rng) override;
    int channels() const override { return 3; }
    int resolution() const override;
    std::size_t size() const { return folder_.images.size(); }
    std::string state() const override;
    void set_state(const std::string& s) override;

private:
    ImageFolder folder_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
};

}  // namespace sgan
