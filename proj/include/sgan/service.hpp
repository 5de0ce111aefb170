// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "sgan/trainer.hpp"

namespace httplib {
class Server;
}

namespace sgan {

/// Wire bound for dragged centers (normalized units).
inline constexpr double kCenterClamp = 1.25;

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

/// Inference backend of the interactive editor. Holds one model read-only;
/// generation is serialized by a single-flight lock, info never takes it.
/// Every endpoint answers 503 until a model is loaded.
class EditService {
public:
    explicit EditService(std::uint64_t reset_seed);

    /// Installs the model; may run while the server is already accepting.
    void load(TrainState model);
    void load_checkpoint_file(const std::string& path);
    bool loaded() const { return current() != nullptr; }

    HttpReply model_info() const;
    HttpReply generate(const nlohmann::json& request);
    HttpReply reset();

    std::string checkpoint_hash() const;

private:
    struct Loaded {
        TrainState state;
        std::string hash;
    };

    std::shared_ptr<Loaded> current() const;

    mutable std::mutex ptr_mutex_;  // guards the model_ pointer only
    std::shared_ptr<Loaded> model_;
    Rng reset_rng_;
    std::mutex model_mutex_;
    std::mutex reset_mutex_;
};

struct ServeOptions {
    std::string cors_origin = "*";
    std::string static_dir;  // optional UI assets
};

/// Registers GET /model/info, POST /generate, POST /reset (and CORS
/// preflight) on `server`.
void install_routes(httplib::Server& server, EditService& service, const ServeOptions& opts = {});

}  // namespace sgan
