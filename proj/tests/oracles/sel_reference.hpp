// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

// Loop-based scalar evaluation of the spatial encoding layers. Tensors are
// read into nested vectors; every op is written out longhand.

#pragma once

#include <cmath>
#include <vector>

#include <torch/torch.h>

namespace oracles {

using Grid = std::vector<std::vector<double>>;  // [H][W]
using Maps = std::vector<Grid>;                 // [C][H][W]

inline Maps to_maps(const torch::Tensor& t) {  // t: [C, H, W]
    auto a = t.detach().to(torch::kFloat64).contiguous();
    Maps m(a.size(0), Grid(a.size(1), std::vector<double>(a.size(2))));
    for (std::size_t c = 0; c < m.size(); ++c)
        for (std::size_t i = 0; i < m[c].size(); ++i)
            for (std::size_t j = 0; j < m[c][i].size(); ++j)
                m[c][i][j] = a[c][i][j].item<double>();
    return m;
}

/// Same-padded 3x3 (or any odd k) convolution with bias.
inline Maps conv(const Maps& in, const torch::Tensor& weight, const torch::Tensor& bias) {
    auto w = weight.detach().to(torch::kFloat64).contiguous();
    auto b = bias.detach().to(torch::kFloat64).contiguous();
    const int out_c = static_cast<int>(w.size(0)), in_c = static_cast<int>(w.size(1));
    const int k = static_cast<int>(w.size(2)), pad = k / 2;
    const int h = static_cast<int>(in[0].size()), wd = static_cast<int>(in[0][0].size());
    auto wa = w.accessor<double, 4>();
    auto ba = b.accessor<double, 1>();
    Maps out(out_c, Grid(h, std::vector<double>(wd, 0.0)));
    for (int o = 0; o < out_c; ++o)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < wd; ++x) {
                double s = ba[o];
                for (int c = 0; c < in_c; ++c)
                    for (int dy = 0; dy < k; ++dy)
                        for (int dx = 0; dx < k; ++dx) {
                            const int yy = y + dy - pad, xx = x + dx - pad;
                            if (yy < 0 || xx < 0 || yy >= h || xx >= wd) continue;
                            s += wa[o][c][dy][dx] * in[c][yy][xx];
                        }
                out[o][y][x] = s;
            }
    return out;
}

inline Maps lrelu(Maps m) {
    for (auto& g : m)
        for (auto& r : g)
            for (auto& v : r) v = v >= 0 ? v : 0.2 * v;
    return m;
}

inline Maps instance_norm(const Maps& in, double eps) {
    Maps out = in;
    for (std::size_t c = 0; c < in.size(); ++c) {
        double sum = 0, n = 0;
        for (const auto& r : in[c])
            for (double v : r) sum += v, n += 1;
        const double mean = sum / n;
        double ss = 0;
        for (const auto& r : in[c])
            for (double v : r) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / n + eps);
        for (std::size_t i = 0; i < in[c].size(); ++i)
            for (std::size_t j = 0; j < in[c][i].size(); ++j) out[c][i][j] = (in[c][i][j] - mean) / sd;
    }
    return out;
}

/// Corner-aligned bilinear resize.
inline Maps resize_bilinear(const Maps& in, int oh, int ow) {
    const int ih = static_cast<int>(in[0].size()), iw = static_cast<int>(in[0][0].size());
    Maps out(in.size(), Grid(oh, std::vector<double>(ow)));
    for (std::size_t c = 0; c < in.size(); ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                const double sy = oh > 1 ? static_cast<double>(y) * (ih - 1) / (oh - 1) : 0.0;
                const double sx = ow > 1 ? static_cast<double>(x) * (iw - 1) / (ow - 1) : 0.0;
                const int y0 = static_cast<int>(std::floor(sy)), x0 = static_cast<int>(std::floor(sx));
                const int y1 = std::min(y0 + 1, ih - 1), x1 = std::min(x0 + 1, iw - 1);
                const double fy = sy - y0, fx = sx - x0;
                out[c][y][x] = (1 - fy) * ((1 - fx) * in[c][y0][x0] + fx * in[c][y0][x1]) +
                               fy * ((1 - fx) * in[c][y1][x0] + fx * in[c][y1][x1]);
            }
    return out;
}

struct ConvParams {
    torch::Tensor weight, bias;
};

inline Maps sel_norm_reference(const Maps& f, const Maps& hm, ConvParams extract, ConvParams sigma, ConvParams mu,
                               ConvParams post, double scale, double eps) {
    const int h = static_cast<int>(f[0].size()), w = static_cast<int>(f[0][0].size());
    Maps hr = (static_cast<int>(hm[0].size()) == h) ? hm : resize_bilinear(hm, h, w);
    Maps nrm = instance_norm(f, eps);
    Maps feat = lrelu(conv(hr, extract.weight, extract.bias));
    Maps s = conv(feat, sigma.weight, sigma.bias);
    Maps m = conv(feat, mu.weight, mu.bias);
    Maps dx = nrm;
    for (std::size_t c = 0; c < f.size(); ++c)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) dx[c][i][j] = (1.0 + s[0][i][j]) * nrm[c][i][j] + m[0][i][j];
    Maps p = conv(lrelu(dx), post.weight, post.bias);
    Maps out = f;
    for (std::size_t c = 0; c < f.size(); ++c)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) out[c][i][j] += scale * p[c][i][j];
    return out;
}

inline Maps sel_concat_reference(const Maps& f, const Maps& hm, ConvParams extract, ConvParams fuse_in,
                                 ConvParams fuse_out, ConvParams post, double scale) {
    const int h = static_cast<int>(f[0].size()), w = static_cast<int>(f[0][0].size());
    Maps hr = (static_cast<int>(hm[0].size()) == h) ? hm : resize_bilinear(hm, h, w);
    Maps feat = lrelu(conv(hr, extract.weight, extract.bias));
    Maps cat = f;
    cat.insert(cat.end(), feat.begin(), feat.end());
    Maps dx = conv(lrelu(conv(cat, fuse_in.weight, fuse_in.bias)), fuse_out.weight, fuse_out.bias);
    Maps p = conv(lrelu(dx), post.weight, post.bias);
    Maps out = f;
    for (std::size_t c = 0; c < f.size(); ++c)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) out[c][i][j] += scale * p[c][i][j];
    return out;
}

}  // namespace oracles
