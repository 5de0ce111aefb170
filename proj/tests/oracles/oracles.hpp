// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library under test except for plain types.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include <torch/torch.h>

namespace oracles {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

/// Mean of N(mu, s^2) truncated to [a, b].
inline double truncated_gaussian_mean(double mu, double s, double a, double b) {
    const double al = (a - mu) / s, be = (b - mu) / s;
    return mu + s * (normal_pdf(al) - normal_pdf(be)) / (normal_cdf(be) - normal_cdf(al));
}

/// P(a <= X < b)^2 for two independent axes.
inline double box_probability(double mu, double s, double a, double b) {
    const double p = normal_cdf((b - mu) / s) - normal_cdf((a - mu) / s);
    return p * p;
}

/// Bump evaluated cell by cell with scalar arithmetic.
inline std::vector<std::vector<double>> bump_per_cell(int res, double cy, double cx, double var) {
    std::vector<std::vector<double>> m(res, std::vector<double>(res));
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) {
            const double gy = 2.0 * i / (res - 1) - 1.0, gx = 2.0 * j / (res - 1) - 1.0;
            m[i][j] = std::exp(-((gy - cy) * (gy - cy) + (gx - cx) * (gx - cx)) / var);
        }
    return m;
}

/// Grid cell nearest to a normalized point; ties go to the first cell in
/// row-major order.
inline std::pair<int, int> nearest_cell(int res, double cy, double cx) {
    std::pair<int, int> best{0, 0};
    double bd = 1e300;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) {
            const double gy = 2.0 * i / (res - 1) - 1.0, gx = 2.0 * j / (res - 1) - 1.0;
            const double d = (gy - cy) * (gy - cy) + (gx - cx) * (gx - cx);
            if (d < bd - 1e-12) {
                bd = d;
                best = {i, j};
            }
        }
    return best;
}

inline double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_std(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = sample_mean(a), mb = sample_mean(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// 4-connected components of {map > thresh} in a 2-D tensor.
inline int count_components(const torch::Tensor& map, double thresh) {
    auto m = map.to(torch::kFloat64).contiguous();
    const int h = static_cast<int>(m.size(0)), w = static_cast<int>(m.size(1));
    auto acc = m.accessor<double, 2>();
    std::vector<int> seen(static_cast<std::size_t>(h * w), 0);
    int n = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            if (acc[i][j] <= thresh || seen[i * w + j]) continue;
            ++n;
            std::queue<std::pair<int, int>> q;
            q.push({i, j});
            seen[i * w + j] = 1;
            while (!q.empty()) {
                auto [y, x] = q.front();
                q.pop();
                const int dy[] = {1, -1, 0, 0}, dx[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int ny = y + dy[k], nx = x + dx[k];
                    if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
                    if (acc[ny][nx] <= thresh || seen[ny * w + nx]) continue;
                    seen[ny * w + nx] = 1;
                    q.push({ny, nx});
                }
            }
        }
    return n;
}

/// Central-difference gradient of a scalar function of a double tensor.
template <class F>
torch::Tensor numeric_grad(F&& f, torch::Tensor x, double eps = 1e-6) {
    x = x.detach().to(torch::kFloat64).clone();
    auto g = torch::zeros_like(x);
    auto flat = x.view({-1});
    auto gf = g.view({-1});
    for (std::int64_t i = 0; i < flat.numel(); ++i) {
        const double v = flat[i].item<double>();
        flat[i] = v + eps;
        const double up = f(x);
        flat[i] = v - eps;
        const double dn = f(x);
        flat[i] = v;
        gf[i] = (up - dn) / (2 * eps);
    }
    return g;
}

}  // namespace oracles
