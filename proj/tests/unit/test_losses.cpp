// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "testing.hpp"

#include <cmath>

#include "oracles/critics.hpp"
#include "oracles/oracles.hpp"
#include "sgan/losses.hpp"

using namespace sgan;

namespace {

double softplus(double v) { return std::log1p(std::exp(-std::abs(v))) + std::max(v, 0.0); }

std::vector<HeatmapPyramid> pyramids(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<HeatmapPyramid> out;
    for (int i = 0; i < n; ++i) out.push_back(sample_pyramid(32, HeatmapSpec{}, rng));
    return out;
}

}  // namespace

TEST_CASE("adversarial losses") {
    SUBCASE("zero scores") {
        auto l = adv_losses(torch::zeros({4}, torch::kFloat64), torch::zeros({4}, torch::kFloat64));
        CHECK(l.d.item<double>() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));
        CHECK(l.g.item<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(l.d.item<double>() == doctest::Approx(1.3863).epsilon(1e-4));
    }
    SUBCASE("saturated critic") {
        auto l = adv_losses(torch::full({3}, 20.0, torch::kFloat64), torch::full({3}, -20.0, torch::kFloat64));
        CHECK(l.d.item<double>() < 1e-6);
    }
    SUBCASE("elementwise oracle") {
        auto sr = Rng(1).randn({32}, torch::kFloat64) * 3.0, sf = Rng(2).randn({32}, torch::kFloat64) * 3.0;
        double d = 0, g = 0;
        for (int i = 0; i < 32; ++i) {
            d += softplus(-sr[i].item<double>()) / 32 + softplus(sf[i].item<double>()) / 32;
            g += softplus(-sf[i].item<double>()) / 32;
        }
        auto l = adv_losses(sr, sf);
        CHECK(l.d.item<double>() == doctest::Approx(d).epsilon(1e-12));
        CHECK(l.g.item<double>() == doctest::Approx(g).epsilon(1e-12));
        CHECK(torch::equal(d_adv_loss(sr, sf), l.d));
        CHECK(torch::equal(g_adv_loss(sf), l.g));
    }
}

TEST_CASE("R1 penalty") {
    SUBCASE("constant critic") {
        oracles::LambdaCritic c(
            "A", [](const torch::Tensor& x) { return x; },
            [](const torch::Tensor& x, const torch::Tensor&) { return x.sum({1, 2, 3}) * 0.0 + 3.0; });
        auto x = torch::randn({2, 1, 8, 8}, torch::kFloat64);
        CHECK(r1_penalty(c, x, 1.0).item<double>() == 0.0);
    }
    SUBCASE("pixel-sum critic gives N/2") {
        oracles::LambdaCritic c(
            "A", [](const torch::Tensor& x) { return x; },
            [](const torch::Tensor& x, const torch::Tensor&) { return x.sum({1, 2, 3}); });
        auto x = torch::randn({5, 1, 8, 8}, torch::kFloat64);
        CHECK(r1_penalty(c, x, 1.0).item<double>() == doctest::Approx(32.0).epsilon(1e-12));
        CHECK(r1_penalty(c, x, 10.0).item<double>() == doctest::Approx(320.0).epsilon(1e-12));
    }
    SUBCASE("conv critic against finite differences") {
        Rng rng(3);
        DiscriminatorSpec spec;
        spec.base_res = 8;
        spec.channel_max = 8;
        spec.tap_resolutions = {4};
        Discriminator d(spec, rng);
        d.to(torch::kFloat64);
        auto x = Rng(4).randn({2, 1, 8, 8}, torch::kFloat64);
        const double gamma = 1.0;
        double expected = 0;
        torch::NoGradGuard ng;
        for (int b = 0; b < 2; ++b) {
            auto g = oracles::numeric_grad([&](const torch::Tensor& xi) { return d.forward(xi).item<double>(); },
                                           x.narrow(0, b, 1));
            expected += g.pow(2).sum().item<double>() / 2;
        }
        expected *= gamma / 2;
        torch::AutoGradMode on(true);
        const double got = r1_penalty(d, x, gamma).item<double>();
        CHECK(std::abs(got - expected) / expected < 1e-3);
    }
}

TEST_CASE("alignment loss from maps") {
    AlignConfig cfg;
    auto t = [](double v) { return std::vector<torch::Tensor>{torch::full({1, 4, 4}, v, torch::kFloat64)}; };
    cfg.levels = {0};

    SUBCASE("identical maps give zero") {
        CHECK(alignment_from_maps(t(0.7), t(0.7), cfg).loss.item<double>() == 0.0);
    }
    SUBCASE("below tau is hard-zero") {
        auto r = alignment_from_maps(t(0.5), t(0.3), cfg);  // L = 0.2
        CHECK(r.per_sample[0].item<double>() == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(r.loss.item<double>() == 0.0);
    }
    SUBCASE("tau boundary keeps the value") {
        auto r = alignment_from_maps(t(0.5), t(0.25), cfg);
        CHECK(r.per_sample[0].item<double>() == 0.25);
        CHECK(r.loss.item<double>() == 0.25);
    }
    SUBCASE("levels are averaged") {
        cfg.levels = {0, 1};
        std::vector<torch::Tensor> a{torch::full({1, 4, 4}, 0.5, torch::kFloat64), torch::full({1, 8, 8}, 1.0, torch::kFloat64)};
        std::vector<torch::Tensor> b{torch::zeros({1, 4, 4}, torch::kFloat64), torch::zeros({1, 8, 8}, torch::kFloat64)};
        CHECK(alignment_from_maps(a, b, cfg).loss.item<double>() == doctest::Approx(0.75).epsilon(1e-12));
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(alignment_from_maps(t(0.5), {torch::zeros({1, 8, 8})}, cfg), ShapeError);
    }
}

TEST_CASE("alignment loss bounds and monotonicity on random maps") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<torch::Tensor> a, b;
        for (int r : {4, 8, 16}) {
            a.push_back(torch::rand({6, r, r}, torch::kFloat64));
            b.push_back(torch::rand({6, r, r}, torch::kFloat64));
        }
        AlignConfig cfg;
        cfg.weight = 0.5 + trial * 0.1;
        double prev = 1e300;
        for (double tau : {0.0, 0.1, 0.2, 0.25, 0.3, 0.33, 0.35, 0.4, 1.0}) {
            cfg.tau = tau;
            const double v = alignment_from_maps(a, b, cfg).loss.item<double>();
            CHECK(v >= 0.0);
            CHECK(v <= cfg.weight);
            CHECK(v <= prev);
            prev = v;
        }
    }
}

TEST_CASE("alignment config validation") {
    AlignConfig c;
    c.tau = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = AlignConfig{};
    c.weight = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = AlignConfig{};
    c.levels = {3};
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("alignment targets are clipped level sums") {
    AlignConfig cfg;
    auto p = render_pyramid(32, HeatmapSpec{}, {{{0, 0}}, {{0.1, 0.1}, {0.1, 0.1}}, {{0, 0}, {0, 0}, {0, 0}, {0, 0}}});
    auto t = alignment_targets({p}, cfg);
    REQUIRE(t.size() == 3);
    CHECK(t[1].max().item<double>() == 1.0);
    CHECK(t[2].sizes() == torch::IntArrayRef{1, 16, 16});
    CHECK(t[0].min().item<double>() > 0.0);
}

TEST_CASE("alignment gradient matches finite differences above tau") {
    Rng rng(6);
    Discriminator d(DiscriminatorSpec{}, rng);
    d.to(torch::kFloat64);
    auto img = Rng(7).randn({2, 1, 32, 32}, torch::kFloat64) * 0.5;
    auto pyr = pyramids(2, 8);
    AlignConfig cfg;

    auto x = img.clone().requires_grad_(true);
    auto r = alignment_loss(d, x, pyr, cfg);
    REQUIRE(r.kept.sum().item<double>() == 2.0);
    auto g = torch::autograd::grad({r.loss}, {x})[0];

    // Probe a fixed subset of pixels; full FD over 2048 inputs is slow.
    Rng pick(9);
    double num2 = 0, diff2 = 0;
    for (int k = 0; k < 64; ++k) {
        const auto idx = static_cast<std::int64_t>(pick.index(static_cast<std::size_t>(img.numel())));
        auto f = [&](double delta) {
            auto xi = img.clone();
            xi.view({-1})[idx] += delta;
            return alignment_loss(d, xi, pyr, cfg).loss.item<double>();
        };
        const double eps = 1e-6;
        const double num = (f(eps) - f(-eps)) / (2 * eps);
        const double ana = g.view({-1})[idx].item<double>();
        num2 += num * num;
        diff2 += (num - ana) * (num - ana);
    }
    CHECK(num2 > 0.0);
    CHECK(std::sqrt(diff2 / num2) < 1e-3);
}

TEST_CASE("alignment loss leaves the critic untouched") {
    Rng rng(10);
    Generator g(GeneratorSpec{}, rng);
    Discriminator d(DiscriminatorSpec{}, rng);
    const auto before = tensors_hash(d.parameters());
    auto z = Rng(11).randn({4, 64});
    auto pyr = pyramids(4, 12);
    auto img = generate(g, z, pyr);
    auto r = alignment_loss(d, img, pyr, AlignConfig{.tau = 0.0});
    auto grads = torch::autograd::grad({r.loss}, g.parameters(), {}, false, false, /*allow_unused=*/true);
    double total = 0;
    for (auto& gr : grads)
        if (gr.defined()) total += gr.abs().sum().item<double>();
    CHECK(total > 0.0);
    for (const auto& p : d.parameters()) {
        CHECK(p.requires_grad());
        CHECK_FALSE(p.grad().defined());
    }
    CHECK(tensors_hash(d.parameters()) == before);
}
