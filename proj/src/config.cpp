// Copyright (C) 2026 The spatialgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgan/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sgan {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw ConfigError("invalid value '" + v + "' for key '" + key + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("invalid boolean '" + v + "' for key '" + key + "'");
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
    return out;
}

template <typename Container>
std::string join(const Container& c) {
    std::string out;
    for (const auto& v : c) out += (out.empty() ? "" : ",") + std::to_string(v);
    return out;
}

template <typename T>
ConfigKey number_key(std::string name, std::string help, T TrainConfig::*field) {
    return {name, std::move(help),
            [field](const TrainConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return fmt_double(c.*field);
                else return std::to_string(c.*field);
            },
            [name, field](TrainConfig& c, const std::string& v) { c.*field = parse_number<T>(name, v); }};
}

template <typename T>
ConfigKey nested_number_key(std::string name, std::string help, std::function<T&(TrainConfig&)> ref) {
    return {name, std::move(help),
            [ref](const TrainConfig& c) {
                auto& value = ref(const_cast<TrainConfig&>(c));
                if constexpr (std::is_floating_point_v<T>) return fmt_double(value);
                else return std::to_string(value);
            },
            [name, ref](TrainConfig& c, const std::string& v) { ref(c) = parse_number<T>(name, v); }};
}

std::vector<ConfigKey> build_keys() {
    std::vector<ConfigKey> k;
    k.push_back({"dataset", "training data: blobs | folder", [](const TrainConfig& c) { return c.dataset; },
                 [](TrainConfig& c, const std::string& v) {
                     if (v != "blobs" && v != "folder") throw ConfigError("dataset must be blobs or folder");
                     c.dataset = v;
                 }});
    k.push_back({"data_path", "image folder for dataset=folder", [](const TrainConfig& c) { return c.data_path; },
                 [](TrainConfig& c, const std::string& v) { c.data_path = v; }});
    k.push_back({"flip", "add horizontal mirrors of folder images", [](const TrainConfig& c) { return std::string(c.flip ? "true" : "false"); },
                 [](TrainConfig& c, const std::string& v) { c.flip = parse_bool("flip", v); }});
    k.push_back(nested_number_key<double>("blob_std", "blob radius (pixels)", [](TrainConfig& c) -> double& { return c.blob.blob_std; }));
    k.push_back(nested_number_key<double>("blob_margin", "blob center margin (pixels)", [](TrainConfig& c) -> double& { return c.blob.margin; }));
    k.push_back(nested_number_key<double>("blob_intensity", "blob peak above background", [](TrainConfig& c) -> double& { return c.blob.intensity; }));
    k.push_back(nested_number_key<double>("blob_noise", "background noise std", [](TrainConfig& c) -> double& { return c.blob.noise_std; }));
    k.push_back(number_key("base_res", "image side (power of two)", &TrainConfig::base_res));
    k.push_back(number_key("latent_dim", "latent vector length", &TrainConfig::latent_dim));
    k.push_back(number_key("channel_max", "widest feature map", &TrainConfig::channel_max));
    k.push_back(number_key("batch_size", "minibatch size", &TrainConfig::batch_size));
    k.push_back(number_key("total_steps", "training steps (one D and one G update each)", &TrainConfig::total_steps));
    k.push_back(number_key("lr", "Adam learning rate", &TrainConfig::lr));
    k.push_back(number_key("beta1", "Adam beta1", &TrainConfig::beta1));
    k.push_back(number_key("beta2", "Adam beta2", &TrainConfig::beta2));
    k.push_back(number_key("r1_gamma", "R1 penalty weight", &TrainConfig::r1_gamma));
    k.push_back(nested_number_key<double>("align_tau", "alignment truncation threshold", [](TrainConfig& c) -> double& { return c.align.tau; }));
    k.push_back(nested_number_key<double>("align_weight", "alignment loss weight", [](TrainConfig& c) -> double& { return c.align.weight; }));
    k.push_back({"align_levels", "levels compared by the alignment loss, e.g. 0,1,2",
                 [](const TrainConfig& c) { return join(c.align.levels); },
                 [](TrainConfig& c, const std::string& v) { c.align.levels = parse_int_list("align_levels", v); }});
    k.push_back(number_key("align_warmup", "step at which the alignment loss starts", &TrainConfig::align_warmup));
    k.push_back(nested_number_key<double>("var0", "level-0 heatmap variance (normalized units)", [](TrainConfig& c) -> double& { return c.heatmap.var0; }));
    k.push_back({"heatmap_counts", "sub-heatmaps per level, e.g. 1,2,4",
                 [](const TrainConfig& c) { return join(c.heatmap.counts); },
                 [](TrainConfig& c, const std::string& v) {
                     auto l = parse_int_list("heatmap_counts", v);
                     if (l.size() != static_cast<std::size_t>(kNumLevels)) throw ConfigError("heatmap_counts needs 3 entries");
                     std::copy(l.begin(), l.end(), c.heatmap.counts.begin());
                 }});
    k.push_back({"heatmap_source", "hierarchical | non_hierarchical | gaussian_noise",
                 [](const TrainConfig& c) { return std::string(to_string(c.heatmap_source)); },
                 [](TrainConfig& c, const std::string& v) { c.heatmap_source = heatmap_source_from_string(v); }});
    k.push_back({"sel_variant", "norm | concat | flatten | none",
                 [](const TrainConfig& c) { return std::string(to_string(c.sel_variant)); },
                 [](TrainConfig& c, const std::string& v) { c.sel_variant = sel_variant_from_string(v); }});
    k.push_back(number_key("log_every", "metrics log cadence (steps)", &TrainConfig::log_every));
    k.push_back(number_key("eval_every", "evaluation cadence (steps, 0 = off)", &TrainConfig::eval_every));
    k.push_back(number_key("eval_pool", "images per side for DI and FID", &TrainConfig::eval_pool));
    k.push_back(number_key("di_repeats", "DI resampling repeats", &TrainConfig::di_repeats));
    k.push_back(number_key("di_per_side", "DI samples per side per repeat", &TrainConfig::di_per_side));
    k.push_back(number_key("checkpoint_every", "checkpoint cadence (steps, 0 = final only)", &TrainConfig::checkpoint_every));
    k.push_back(number_key("grid_rows", "sample grid rows (shared heatmaps)", &TrainConfig::grid_rows));
    k.push_back(number_key("grid_cols", "sample grid columns (shared latents)", &TrainConfig::grid_cols));
    k.push_back(number_key("seed", "master seed", &TrainConfig::seed));
    k.push_back(number_key("threads", "intra-op threads", &TrainConfig::threads));
    return k;
}

}  // namespace

void TrainConfig::validate() const {
    if (dataset != "blobs" && dataset != "folder") throw ConfigError("dataset must be blobs or folder");
    if (base_res < 16 || (base_res & (base_res - 1)) != 0) throw ConfigError("base_res must be a power of two >= 16");
    if (latent_dim < 1 || channel_max < 16) throw ConfigError("latent_dim must be positive and channel_max >= 16");
    if (dataset == "folder" && data_path.empty()) throw ConfigError("dataset=folder needs data_path");
    if (dataset == "blobs") {
        BlobSpec b = blob;
        b.res = base_res;
        b.validate();
    }
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (total_steps < 0) throw ConfigError("total_steps must be nonnegative");
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("Adam betas must be in [0, 1)");
    if (r1_gamma < 0.0) throw ConfigError("r1_gamma must be nonnegative");
    if (log_every < 1) throw ConfigError("log_every must be positive");
    if (eval_every < 0 || checkpoint_every < 0) throw ConfigError("cadences must be nonnegative");
    if (di_per_side < 1 || di_repeats < 1) throw ConfigError("DI settings must be positive");
    if (eval_pool < di_per_side) throw ConfigError("eval_pool must be at least di_per_side");
    if (grid_rows < 1 || grid_cols < 1) throw ConfigError("grid dimensions must be positive");
    if (threads < 1) throw ConfigError("threads must be positive");
    align.validate();
    heatmap.validate();
    for (int l = 0; l < kNumLevels; ++l)
        if (heatmap.resolutions[l] != (4 << l)) throw ConfigError("heatmap levels must render at 4, 8 and 16");
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& k : config_keys()) {
        if (k.name == key) {
            k.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

TrainConfig parse_config_text(const std::string& text, TrainConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

TrainConfig load_config_file(const std::string& path, TrainConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

std::string config_to_text(const TrainConfig& cfg) {
    std::string out;
    for (const auto& k : config_keys()) out += k.name + " = " + k.get(cfg) + "\n";
    return out;
}

std::string config_hash(const TrainConfig& cfg) { return sha256_hex(config_to_text(cfg)); }

}  // namespace sgan
