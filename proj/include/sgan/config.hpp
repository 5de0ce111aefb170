// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgan/data.hpp"
#include "sgan/heatmap.hpp"
#include "sgan/losses.hpp"
#include "sgan/sel.hpp"

namespace sgan {

/// Every hyperparameter of a training run. Field names double as the keys
/// of the flat config file and the CLI flags.
struct TrainConfig {
    std::string dataset = "blobs";  // blobs | folder
    std::string data_path;
    bool flip = false;
    BlobSpec blob;

    int base_res = 32;
    int latent_dim = 64;
    int channel_max = 64;
    int batch_size = 16;
    std::int64_t total_steps = 5000;

    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double r1_gamma = 1.0;

    AlignConfig align;
    std::int64_t align_warmup = 0;

    HeatmapSpec heatmap;
    HeatmapSource heatmap_source = HeatmapSource::hierarchical;
    SelVariant sel_variant = SelVariant::norm;

    std::int64_t log_every = 50;
    std::int64_t eval_every = 0;  // 0 disables periodic evaluation
    int eval_pool = 2000;
    int di_repeats = 200;
    int di_per_side = 64;
    std::int64_t checkpoint_every = 0;  // 0: only the final checkpoint
    int grid_rows = 4;
    int grid_cols = 8;
    std::uint64_t seed = 0;
    int threads = 1;

    /// Heatmaps are sampled and L_align computed only when SEL or Flatten
    /// conditioning is on.
    bool uses_heatmaps() const { return sel_variant != SelVariant::none; }
    int out_channels() const { return dataset == "folder" ? 3 : 1; }

    void validate() const;
};

struct ConfigKey {
    std::string name;
    std::string help;
    std::function<std::string(const TrainConfig&)> get;
    std::function<void(TrainConfig&, const std::string&)> set;
};

/// All accepted keys, in canonical order.
const std::vector<ConfigKey>& config_keys();

/// Throws ConfigError on unknown keys or unparsable values.
void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);

/// Parses "key = value" lines; '#' starts a comment.
TrainConfig parse_config_text(const std::string& text, TrainConfig base = {});
TrainConfig load_config_file(const std::string& path, TrainConfig base = {});

/// Canonical text (every key, canonical order); parse_config_text inverts it.
std::string config_to_text(const TrainConfig& cfg);
std::string config_hash(const TrainConfig& cfg);

}  // namespace sgan
