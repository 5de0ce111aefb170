// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "testing.hpp"

#include "sgan/config.hpp"

using namespace sgan;

TEST_CASE("defaults") {
    TrainConfig c;
    CHECK(c.base_res == 32);
    CHECK(c.batch_size == 16);
    CHECK(c.total_steps == 5000);
    CHECK(c.lr == 2e-4);
    CHECK(c.r1_gamma == 1.0);
    CHECK(c.align.tau == 0.25);
    CHECK(c.align.weight == 1.0);
    CHECK(c.heatmap.var0 == 0.5);
    CHECK(c.heatmap.counts == std::array<int, 3>{1, 2, 4});
    CHECK(c.sel_variant == SelVariant::norm);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("text round trip covers every key") {
    TrainConfig c;
    set_config_value(c, "lr", "0.0025");
    set_config_value(c, "batch_size", "64");
    set_config_value(c, "align_levels", "0,2");
    set_config_value(c, "heatmap_counts", "1,3,5");
    set_config_value(c, "sel_variant", "concat");
    set_config_value(c, "heatmap_source", "non_hierarchical");
    set_config_value(c, "seed", "18446744073709551615");
    set_config_value(c, "flip", "true");
    auto text = config_to_text(c);
    auto d = parse_config_text(text);
    CHECK(config_to_text(d) == text);
    CHECK(config_hash(d) == config_hash(c));
    CHECK(d.lr == 0.0025);
    CHECK(d.align.levels == std::vector<int>{0, 2});
    CHECK(d.heatmap.counts == std::array<int, 3>{1, 3, 5});
    CHECK(d.seed == 18446744073709551615ULL);
    CHECK(d.flip);
    for (const auto& k : config_keys()) CHECK(text.find(k.name + " = ") != std::string::npos);
}

TEST_CASE("hash tracks every change") {
    TrainConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.align.tau = 0.3;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(config_hash(a).size() == 64);
}

TEST_CASE("parsing comments and whitespace") {
    auto c = parse_config_text("# a comment\n\n  total_steps =  200  \nlr=1e-3 # trailing\n");
    CHECK(c.total_steps == 200);
    CHECK(c.lr == 1e-3);
}

TEST_CASE("unknown keys and bad values are rejected") {
    TrainConfig c;
    CHECK_THROWS_AS(set_config_value(c, "learning_rate", "1"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("btach_size = 4\n"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "batch_size", "four"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "batch_size", "4x"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "sel_variant", "styled"), ConfigError);
    CHECK_THROWS_AS(set_config_value(c, "flip", "maybe"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(load_config_file("/nonexistent/cfg.txt"), ConfigError);
}

TEST_CASE("validation") {
    auto bad = [](const char* k, const char* v) {
        TrainConfig c;
        set_config_value(c, k, v);
        return c;
    };
    CHECK_THROWS_AS(bad("base_res", "24").validate(), ConfigError);
    CHECK_THROWS_AS(bad("batch_size", "0").validate(), ConfigError);
    CHECK_THROWS_AS(bad("align_tau", "-1").validate(), ConfigError);
    CHECK_THROWS_AS(bad("var0", "0").validate(), ConfigError);
    CHECK_THROWS_AS(bad("dataset", "lsun").validate(), ConfigError);
    CHECK_THROWS_AS(bad("di_per_side", "5000").validate(), ConfigError);
    TrainConfig folder;
    folder.dataset = "folder";
    CHECK_THROWS_AS(folder.validate(), ConfigError);  // needs data_path
    CHECK(folder.out_channels() == 3);
    TrainConfig none;
    none.sel_variant = SelVariant::none;
    CHECK_FALSE(none.uses_heatmaps());
}
