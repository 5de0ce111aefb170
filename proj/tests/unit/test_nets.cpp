// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "testing.hpp"

#include "sgan/losses.hpp"
#include "sgan/nets.hpp"

using namespace sgan;

namespace {

std::vector<HeatmapPyramid> pyramids(int n, int base_res, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<HeatmapPyramid> out;
    for (int i = 0; i < n; ++i) out.push_back(sample_pyramid(base_res, HeatmapSpec{}, rng));
    return out;
}

}  // namespace

TEST_CASE("generator shape and range for every variant") {
    for (int res : {32, 64}) {
        for (auto v : {SelVariant::none, SelVariant::norm, SelVariant::concat, SelVariant::flatten}) {
            for (int oc : {1, 3}) {
                GeneratorSpec spec;
                spec.base_res = res;
                spec.sel_variant = v;
                spec.out_channels = oc;
                spec.channel_max = 32;
                Rng rng(1);
                Generator g(spec, rng);
                auto z = Rng(2).randn({3, spec.latent_dim}) * 4.0;
                auto img = generate(g, z, pyramids(3, res, 3));
                CHECK(img.sizes() == torch::IntArrayRef{3, oc, res, res});
                CHECK(img.min().item<double>() >= -1.0);
                CHECK(img.max().item<double>() <= 1.0);
            }
        }
    }
}

TEST_CASE("generate is deterministic") {
    Rng rng(4);
    Generator g(GeneratorSpec{}, rng);
    auto z = Rng(5).randn({2, 64});
    auto p = pyramids(2, 32, 6);
    CHECK(torch::equal(generate(g, z, p), generate(g, z, p)));
}

TEST_CASE("zero-init SEL layers reproduce the SEL-free backbone") {
    GeneratorSpec with;
    GeneratorSpec without;
    without.sel_variant = SelVariant::none;
    Rng r1(7), r2(8);
    Generator g_sel(with, r1), g_plain(without, r2);
    copy_matching_parameters(g_plain, g_sel);
    auto z = Rng(9).randn({4, 64});
    CHECK(torch::equal(generate(g_sel, z, pyramids(4, 32, 10)), generate(g_plain, z, {})));
}

TEST_CASE("level and resolution mismatches are rejected") {
    Rng rng(11);
    Generator g(GeneratorSpec{}, rng);
    auto z = torch::randn({2, 64});
    CHECK_THROWS_AS(generate(g, z, pyramids(1, 32, 1)), ShapeError);
    CHECK_THROWS_AS(g.forward(z, {torch::zeros({2, 1, 4, 4}), torch::zeros({2, 2, 8, 8})}), ShapeError);
    CHECK_THROWS_AS(g.forward(z, {torch::zeros({2, 1, 4, 4}), torch::zeros({2, 2, 8, 8}), torch::zeros({2, 3, 16, 16})}),
                    ShapeError);
    CHECK_THROWS_AS(g.forward(torch::zeros({2, 63}), {}), ShapeError);
}

TEST_CASE("SEL post kernels receive gradient at zero init") {
    Rng rng(12);
    Generator g(GeneratorSpec{}, rng);
    Discriminator d(DiscriminatorSpec{}, rng);
    auto z = Rng(13).randn({4, 64});
    auto img = generate(g, z, pyramids(4, 32, 14));
    auto loss = g_adv_loss(d.evaluate(img).score);
    std::vector<torch::Tensor> posts;
    for (int l = 0; l < 3; ++l) posts.push_back(g.sel_at(l)->post_conv()->weight);
    auto grads = torch::autograd::grad({loss}, posts);
    for (auto& gr : grads) CHECK(gr.abs().sum().item<double>() > 0.0);
}

TEST_CASE("discriminator taps and batch independence") {
    for (int res : {32, 64}) {
        DiscriminatorSpec spec;
        spec.base_res = res;
        Rng rng(15);
        Discriminator d(spec, rng);
        auto x = Rng(16).randn({3, 1, res, res});
        auto out = d.evaluate(x);
        CHECK(out.score.sizes() == torch::IntArrayRef{3});
        REQUIRE(out.taps.size() == 3);
        for (int r : {4, 8, 16}) {
            REQUIRE(out.taps.count(tap_name(r)) == 1);
            CHECK(out.taps.at(tap_name(r)).size(2) == r);
            CHECK(out.taps.at(tap_name(r)).size(3) == r);
        }
        auto doubled = d.evaluate(torch::cat({x, Rng(17).randn({3, 1, res, res})})).score.narrow(0, 0, 3);
        CHECK((doubled - out.score).abs().max().item<double>() < 1e-5);
    }
}

TEST_CASE("spec validation") {
    GeneratorSpec g;
    g.base_res = 24;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    DiscriminatorSpec d;
    d.tap_resolutions = {2};
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("frozen parameters restore their flags") {
    Rng rng(18);
    Discriminator d(DiscriminatorSpec{}, rng);
    {
        FrozenParameters f(d.parameters());
        for (const auto& p : d.parameters()) CHECK_FALSE(p.requires_grad());
    }
    for (const auto& p : d.parameters()) CHECK(p.requires_grad());
}
