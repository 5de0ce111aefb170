// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <torch/torch.h>

namespace sgan {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shape or level/resolution disagreement.
class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Seeded random source. Every stochastic routine takes one of these by
/// reference; there is no global generator anywhere in the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);
    /// Independent stream derived from (seed, stream).
    Rng(std::uint64_t seed, std::uint64_t stream);

    double normal(double mean, double stddev);
    double uniform(double lo, double hi);
    std::uint64_t next_u64();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    /// Standard-normal float tensor of the given shape.
    torch::Tensor randn(at::IntArrayRef shape, torch::Dtype dtype = torch::kFloat32);

    std::string state() const;
    void set_state(const std::string& s);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// SHA-256 over the raw bytes of a list of tensors (order-sensitive).
std::string tensors_hash(const std::vector<torch::Tensor>& tensors);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

/// Leaky-ReLU slope used everywhere in the networks.
inline constexpr double kLeakySlope = 0.2;

}  // namespace sgan
