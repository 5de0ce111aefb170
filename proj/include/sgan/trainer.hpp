// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgan/config.hpp"
#include "sgan/data.hpp"
#include "sgan/metrics.hpp"
#include "sgan/nets.hpp"

namespace sgan {

class TrainingError : public Error {
public:
    using Error::Error;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

/// Independent random streams derived from the master seed.
enum RngStream : std::uint64_t {
    kStreamGenInit = 1,
    kStreamDiscInit = 2,
    kStreamData = 3,
    kStreamLatent = 4,
    kStreamHeatmap = 5,
    kStreamEval = 6,
};

/// Everything a run needs: networks, optimizers, random streams, step.
struct TrainState {
    TrainConfig cfg;
    std::string cfg_hash;
    std::shared_ptr<Generator> g;
    std::shared_ptr<Discriminator> d;
    std::unique_ptr<torch::optim::Adam> opt_g;
    std::unique_ptr<torch::optim::Adam> opt_d;
    std::unique_ptr<ImageSource> data;
    std::shared_ptr<FeatureExtractor> extractor;
    Rng data_rng;
    Rng latent_rng;
    Rng heatmap_rng;
    std::int64_t step = 0;
};

/// Builds a fresh state; the image source is created from the config.
TrainState make_state(const TrainConfig& cfg);
/// Same, with an explicit image source (tests, custom data).
TrainState make_state(const TrainConfig& cfg, std::unique_ptr<ImageSource> data);

GeneratorSpec generator_spec(const TrainConfig& cfg);
DiscriminatorSpec discriminator_spec(const TrainConfig& cfg);

struct StepStats {
    double loss_d = 0.0;
    double loss_g = 0.0;
    double r1 = 0.0;
    double l_align = 0.0;  // unweighted truncated alignment value (0 when off)
    double min_real = 0.0;
    double max_fake = 0.0;
    double heatmap_ms = 0.0;
};

/// One D update (logistic loss + R1 on reals) then one G update (logistic
/// loss + weight * L_align, with D frozen). Throws TrainingError on a
/// non-finite loss.
StepStats train_step(TrainState& state);

/// Samples the heatmaps one batch of G inputs uses, per the config's source.
std::vector<HeatmapPyramid> sample_batch_heatmaps(const TrainConfig& cfg, int batch, Rng& rng);

struct SpatialAwareness {
    double r_x = 0.0;
    double r_y = 0.0;
    std::vector<PixelCoord> requested;
    std::vector<PixelCoord> achieved;
};

/// Pyramids drawn for the spatial-awareness probe at evaluation time.
inline constexpr int kSpatialProbeSize = 256;

struct EvalReport {
    DIReport di;
    FidResult fid;
    std::optional<SpatialAwareness> spatial;  // blob dataset only
    torch::Tensor grid;  // [C, H, W] sample grid
    std::string config_hash;

    nlohmann::json to_json() const;
};

/// Metrics on a parameter snapshot. Uses its own random stream, so the
/// training streams and parameters are untouched.
EvalReport evaluate(TrainState& state);

/// Grid where row r uses rows[r] (empty for unconditioned models) and column
/// c uses latents[c].
torch::Tensor render_grid(Generator& g, const std::vector<HeatmapPyramid>& rows, const torch::Tensor& latents,
                          int n_rows);

/// rows x cols images: row r shares one pyramid, column c one latent.
torch::Tensor sample_grid(Generator& g, const TrainConfig& cfg, int rows, int cols, Rng& rng);

/// Correlation between the requested level-0 center and the generated
/// blob centroid over n hierarchical pyramids.
SpatialAwareness measure_spatial_awareness(Generator& g, const TrainConfig& cfg, int n, Rng& rng);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Parameter hash of G and D.
std::string model_hash(TrainState& state);

inline constexpr std::int64_t kCheckpointVersion = 1;

void save_checkpoint(TrainState& state, const std::string& path);
/// Rebuilds the state from the stored config; refuses other versions.
TrainState load_checkpoint(const std::string& path);

struct RunOptions {
    std::string run_dir;
    bool quiet = false;
    /// Stop (and checkpoint) once this step is reached, below total_steps.
    /// Simulates an interrupted run; negative means run to completion.
    std::int64_t stop_at = -1;
};

struct RunResult {
    std::string metrics_log;
    std::string timing_log;
    std::string checkpoint;
    std::vector<std::string> outputs;
};

/// Trains until cfg.total_steps, writing metrics.jsonl (deterministic),
/// timing.jsonl (wall clock), checkpoints and evaluation artifacts.
RunResult run_training(TrainState& state, const RunOptions& opts);

}  // namespace sgan
