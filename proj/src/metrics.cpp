// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sgan/layers.hpp"

namespace sgan {

namespace {

/// First k entries of a partial Fisher-Yates shuffle of [0, n).
std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
    idx.resize(k);
    return idx;
}

}  // namespace

nlohmann::json DIReport::to_json() const {
    return {{"repeats", repeats}, {"per_side", per_side}, {"seed", seed},
            {"min_real", min_real}, {"max_fake", max_fake}, {"di_mean", di_mean}};
}

DIReport disequilibrium_indicator(std::span<const double> real_pool, std::span<const double> fake_pool, Rng& rng,
                                  int repeats, int per_side, std::uint64_t seed) {
    if (repeats < 1 || per_side < 1) throw ConfigError("DI needs positive repeats and per_side");
    if (real_pool.size() < static_cast<std::size_t>(per_side) || fake_pool.size() < static_cast<std::size_t>(per_side))
        throw Error("DI: score pool smaller than per_side (" + std::to_string(per_side) + ")");
    DIReport r;
    r.repeats = repeats;
    r.per_side = per_side;
    r.seed = seed;
    double total = 0.0;
    const auto k = static_cast<std::size_t>(per_side);
    for (int i = 0; i < repeats; ++i) {
        double lo = std::numeric_limits<double>::infinity();
        for (auto j : draw_without_replacement(real_pool.size(), k, rng)) lo = std::min(lo, real_pool[j]);
        double hi = -std::numeric_limits<double>::infinity();
        for (auto j : draw_without_replacement(fake_pool.size(), k, rng)) hi = std::max(hi, fake_pool[j]);
        r.min_real.push_back(lo);
        r.max_fake.push_back(hi);
        total += lo - hi;
    }
    r.di_mean = total / repeats;
    return r;
}

FeatureStats feature_stats(const torch::Tensor& features) {
    if (features.dim() != 2 || features.size(0) < 2) throw ShapeError("feature_stats: need [N >= 2, D] features");
    auto f = features.detach().to(torch::kFloat64).contiguous();
    const auto n = f.size(0);
    const auto d = f.size(1);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(f.data_ptr<double>(), n, d);
    FeatureStats s;
    s.count = n;
    s.mean = m.colwise().mean().transpose();
    Eigen::MatrixXd centered = m.rowwise() - s.mean.transpose();
    s.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    if (n < d + 1) {
        s.cov += 1e-6 * Eigen::MatrixXd::Identity(d, d);
        s.regularized = true;
    }
    return s;
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
    Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const FeatureStats& a, const FeatureStats& b) {
    if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() || a.cov.rows() != a.mean.size())
        throw ShapeError("frechet_distance: dimension mismatch");
    if (!a.mean.allFinite() || !b.mean.allFinite() || !a.cov.allFinite() || !b.cov.allFinite())
        throw Error("frechet_distance: non-finite statistics");
    const Eigen::MatrixXd root_a = psd_sqrt(a.cov);
    const Eigen::MatrixXd inner = root_a * b.cov * root_a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
    const double tr_cross = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() - 2.0 * tr_cross;
    return std::max(d, 0.0);
}

FeatureExtractor::FeatureExtractor(int in_channels) {
    auto conv = [](int in, int out) {
        return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(2).padding(1));
    };
    c1 = register_module("c1", conv(in_channels, 16));
    c2 = register_module("c2", conv(16, 32));
    c3 = register_module("c3", conv(32, 32));
    Rng rng(kSeed);
    init_fan_in(c1, rng);
    init_fan_in(c2, rng);
    init_fan_in(c3, rng);
    for (auto& p : parameters()) p.set_requires_grad(false);
}

torch::Tensor FeatureExtractor::forward(const torch::Tensor& images) {
    auto h = lrelu(c1(images));
    h = lrelu(c2(h));
    h = lrelu(c3(h));
    return torch::adaptive_avg_pool2d(h, {2, 2}).flatten(1);
}

torch::Tensor FeatureExtractor::embed(const torch::Tensor& images, int chunk) {
    torch::NoGradGuard guard;
    std::vector<torch::Tensor> parts;
    for (std::int64_t i = 0; i < images.size(0); i += chunk) {
        parts.push_back(forward(images.slice(0, i, std::min<std::int64_t>(i + chunk, images.size(0)))));
    }
    return torch::cat(parts);
}

FidResult fid_between_sets(const torch::Tensor& images_a, const torch::Tensor& images_b, FeatureExtractor& extractor) {
    auto dtype = extractor.parameters().front().scalar_type();
    auto sa = feature_stats(extractor.embed(images_a.to(dtype)));
    auto sb = feature_stats(extractor.embed(images_b.to(dtype)));
    return {frechet_distance(sa, sb), sa.regularized || sb.regularized};
}

nlohmann::json MetricsRecord::to_json() const {
    nlohmann::json j = {{"step", step},         {"loss_D", loss_d},     {"loss_G", loss_g},
                        {"L_align", l_align},   {"min_real", min_real}, {"max_fake", max_fake}};
    if (di_mean) j["di_mean"] = *di_mean;
    if (fid) j["fid"] = *fid;
    j["config_hash"] = config_hash;
    return j;
}

MetricsRecord MetricsRecord::from_json(const nlohmann::json& j) {
    MetricsRecord r;
    r.step = j.at("step").get<std::int64_t>();
    r.loss_d = j.at("loss_D").get<double>();
    r.loss_g = j.at("loss_G").get<double>();
    r.l_align = j.at("L_align").get<double>();
    r.min_real = j.at("min_real").get<double>();
    r.max_fake = j.at("max_fake").get<double>();
    if (j.contains("di_mean")) r.di_mean = j["di_mean"].get<double>();
    if (j.contains("fid")) r.fid = j["fid"].get<double>();
    r.config_hash = j.value("config_hash", std::string{});
    return r;
}

std::string to_log_line(const MetricsRecord& r) { return r.to_json().dump() + "\n"; }

std::vector<MetricsRecord> read_metrics_log(std::istream& in) {
    std::vector<MetricsRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(MetricsRecord::from_json(nlohmann::json::parse(line)));
    }
    return out;
}

std::vector<MetricsRecord> read_metrics_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open metrics log " + path);
    return read_metrics_log(in);
}

ScoreSeries score_curves(const std::vector<MetricsRecord>& log) {
    ScoreSeries s;
    for (const auto& r : log) {
        s.steps.push_back(r.step);
        s.min_real.push_back(r.min_real);
        s.max_fake.push_back(r.max_fake);
    }
    return s;
}

std::string score_curves_svg(const ScoreSeries& series, int width, int height) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!series.steps.empty()) {
        const double margin = 40.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (double v : series.min_real) lo = std::min(lo, v), hi = std::max(hi, v);
        for (double v : series.max_fake) lo = std::min(lo, v), hi = std::max(hi, v);
        if (hi - lo < 1e-12) hi = lo + 1.0;
        const double s0 = static_cast<double>(series.steps.front());
        const double s1 = std::max(static_cast<double>(series.steps.back()), s0 + 1.0);
        auto px = [&](std::int64_t step) { return margin + (step - s0) / (s1 - s0) * (width - 2 * margin); };
        auto py = [&](double v) { return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin); };
        auto polyline = [&](const std::vector<double>& ys, const char* color) {
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < ys.size(); ++i) os << px(series.steps[i]) << ',' << py(ys[i]) << ' ';
            os << "\"/>\n";
        };
        polyline(series.min_real, "#1f77b4");
        polyline(series.max_fake, "#d62728");
        os << "<text x=\"" << margin << "\" y=\"20\" font-size=\"12\" fill=\"#1f77b4\">min real score</text>\n"
           << "<text x=\"" << margin + 120 << "\" y=\"20\" font-size=\"12\" fill=\"#d62728\">max fake score</text>\n"
           << "<text x=\"4\" y=\"" << py(hi) + 4 << "\" font-size=\"10\">" << hi << "</text>\n"
           << "<text x=\"4\" y=\"" << py(lo) + 4 << "\" font-size=\"10\">" << lo << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace sgan
