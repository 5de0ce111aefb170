// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sgan/common.hpp"

namespace sgan {

/// Disequilibrium Indicator: per repeat, draw per_side scores without
/// replacement from each pool and record min(real) - max(fake).
struct DIReport {
    int repeats = 0;
    int per_side = 0;
    std::uint64_t seed = 0;
    std::vector<double> min_real;
    std::vector<double> max_fake;
    double di_mean = 0.0;

    nlohmann::json to_json() const;
};

inline constexpr int kDefaultDIRepeats = 200;
inline constexpr int kDefaultDIPerSide = 64;

/// Draws come from `rng`; `seed` is only recorded in the report.
DIReport disequilibrium_indicator(std::span<const double> real_pool, std::span<const double> fake_pool, Rng& rng,
                                  int repeats = kDefaultDIRepeats, int per_side = kDefaultDIPerSide,
                                  std::uint64_t seed = 0);

struct FeatureStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::int64_t count = 0;
    /// Set when too few samples forced a 1e-6 * I ridge on the covariance.
    bool regularized = false;
};

/// Mean and unbiased covariance of [N, D] features.
FeatureStats feature_stats(const torch::Tensor& features);

/// |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)), with the root taken
/// through the symmetric form S_a^(1/2) S_b S_a^(1/2); negative eigenvalues
/// are clipped at zero.
double frechet_distance(const FeatureStats& a, const FeatureStats& b);

/// Frozen random-weight conv net used as the desk-scale FID embedding.
class FeatureExtractor : public torch::nn::Module {
public:
    static constexpr std::uint64_t kSeed = 0x5eed'f1d0ULL;

    explicit FeatureExtractor(int in_channels);
    torch::Tensor forward(const torch::Tensor& images);
    /// Embeds in chunks without tracking gradients.
    torch::Tensor embed(const torch::Tensor& images, int chunk = 256);
    int feature_dim() const { return 128; }

private:
    torch::nn::Conv2d c1{nullptr}, c2{nullptr}, c3{nullptr};
};

struct FidResult {
    double value = 0.0;
    bool regularized = false;
};

FidResult fid_between_sets(const torch::Tensor& images_a, const torch::Tensor& images_b, FeatureExtractor& extractor);

/// One line of the append-only metrics log.
struct MetricsRecord {
    std::int64_t step = 0;
    double loss_d = 0.0;
    double loss_g = 0.0;
    double l_align = 0.0;
    double min_real = 0.0;
    double max_fake = 0.0;
    std::optional<double> di_mean;
    std::optional<double> fid;
    std::string config_hash;

    nlohmann::json to_json() const;
    static MetricsRecord from_json(const nlohmann::json& j);
    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

std::string to_log_line(const MetricsRecord& r);
std::vector<MetricsRecord> read_metrics_log(std::istream& in);
std::vector<MetricsRecord> read_metrics_log(const std::string& path);

struct ScoreSeries {
    std::vector<std::int64_t> steps;
    std::vector<double> min_real;
    std::vector<double> max_fake;
};

ScoreSeries score_curves(const std::vector<MetricsRecord>& log);

/// Two-line chart of min real score and max fake score against step.
std::string score_curves_svg(const ScoreSeries& series, int width = 640, int height = 360);

}  // namespace sgan
