#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tricycle/pipeline.hpp"

namespace tricycle {

// Flat `key = value` config document mirroring TrainingConfig field names
// (nested weight/augmentation fields use their own names directly). Lines
// starting with '#' are comments. Unknown keys are rejected.
namespace config {

inline std::map<std::string, std::string> parse_lines(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return kv;
}

inline void apply_overrides(TrainingConfig& c, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        auto as_d = [&] { return std::stod(value); };
        auto as_i = [&] { return std::stoi(value); };
        auto as_u64 = [&] { return static_cast<uint64_t>(std::stoull(value)); };
        auto as_b = [&] {
            if (value == "true" || value == "1" || value == "on") return true;
            if (value == "false" || value == "0" || value == "off") return false;
            throw ConfigError("config: bad boolean for " + key);
        };
        if (key == "learning_rate") c.learning_rate = as_d();
        else if (key == "batch_size") c.batch_size = as_i();
        else if (key == "ramp_start_epoch") c.ramp_start_epoch = as_i();
        else if (key == "ramp_end_epoch") c.ramp_end_epoch = as_i();
        else if (key == "synthetic_cadence") c.synthetic_cadence = as_i();
        else if (key == "early_stop_patience") c.early_stop_patience = as_i();
        else if (key == "seed") c.seed = as_u64();
        else if (key == "image_size") c.image_size = as_i();
        else if (key == "domain_channels") c.domain_channels = as_i();
        else if (key == "base_width") c.base_width = as_i();
        else if (key == "depth") c.depth = as_i();
        else if (key == "max_epochs") c.max_epochs = as_i();
        else if (key == "pretrain_epochs") c.pretrain_epochs = as_i();
        else if (key == "finetune_epochs") c.finetune_epochs = as_i();
        else if (key == "baseline_epochs") c.baseline_epochs = as_i();
        else if (key == "use_cone") c.use_cone = as_b();
        else if (key == "occlude_in_chain") c.occlude_in_chain = as_b();
        else if (key == "disc_on_synthetic") c.disc_on_synthetic = as_b();
        else if (key == "finetune_full_chain") c.finetune_full_chain = as_b();
        else if (key == "deterministic") c.deterministic = as_b();
        else if (key == "improvement_delta") c.improvement_delta = as_d();
        else if (key == "edge_backend") c.edge_backend = value;
        else if (key == "lambda1") c.weights.lambda1 = as_d();
        else if (key == "lambda2") c.weights.lambda2 = as_d();
        else if (key == "alpha") c.weights.alpha = as_d();
        else if (key == "beta") c.weights.beta = as_d();
        else if (key == "epsilon") c.weights.epsilon = as_d();
        else if (key == "bce_reduction") {
            if (value == "mean") c.weights.bce_reduction = BceReduction::Mean;
            else if (value == "sum") c.weights.bce_reduction = BceReduction::Sum;
            else throw ConfigError("config: bce_reduction must be mean or sum");
        }
        else if (key == "m2s_cycle_literal") c.weights.m2s_cycle_literal = as_b();
        else if (key == "max_translate_px") c.augment.max_translate_px = as_i();
        else if (key == "hflip_p") c.augment.hflip_p = as_d();
        else if (key == "rot90") c.augment.rot90 = as_b();
        else if (key == "max_brightness") c.augment.max_brightness = as_d();
        else if (key == "max_contrast") c.augment.max_contrast = as_d();
        else if (key == "max_hue") c.augment.max_hue = as_d();
        else if (key == "max_saturation") c.augment.max_saturation = as_d();
        else if (key == "style_channel") c.augment.style_channel = as_b();
        else throw ConfigError("config: unknown key '" + key + "'");
    }
}

inline void load_file(TrainingConfig& c, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    apply_overrides(c, parse_lines(in));
}

inline std::string serialize(const TrainingConfig& c) {
    std::ostringstream os;
    os << "learning_rate = " << c.learning_rate << '\n'
       << "batch_size = " << c.batch_size << '\n'
       << "ramp_start_epoch = " << c.ramp_start_epoch << '\n'
       << "ramp_end_epoch = " << c.ramp_end_epoch << '\n'
       << "synthetic_cadence = " << c.synthetic_cadence << '\n'
       << "early_stop_patience = " << c.early_stop_patience << '\n'
       << "seed = " << c.seed << '\n'
       << "image_size = " << c.image_size << '\n'
       << "domain_channels = " << c.domain_channels << '\n'
       << "base_width = " << c.base_width << '\n'
       << "depth = " << c.depth << '\n'
       << "max_epochs = " << c.max_epochs << '\n'
       << "pretrain_epochs = " << c.pretrain_epochs << '\n'
       << "finetune_epochs = " << c.finetune_epochs << '\n'
       << "baseline_epochs = " << c.baseline_epochs << '\n'
       << "use_cone = " << (c.use_cone ? "true" : "false") << '\n'
       << "occlude_in_chain = " << (c.occlude_in_chain ? "true" : "false") << '\n'
       << "disc_on_synthetic = " << (c.disc_on_synthetic ? "true" : "false") << '\n'
       << "finetune_full_chain = " << (c.finetune_full_chain ? "true" : "false") << '\n'
       << "deterministic = " << (c.deterministic ? "true" : "false") << '\n'
       << "improvement_delta = " << c.improvement_delta << '\n'
       << "edge_backend = " << c.edge_backend << '\n'
       << "lambda1 = " << c.weights.lambda1 << '\n'
       << "lambda2 = " << c.weights.lambda2 << '\n'
       << "alpha = " << c.weights.alpha << '\n'
       << "beta = " << c.weights.beta << '\n'
       << "epsilon = " << c.weights.epsilon << '\n'
       << "bce_reduction = " << (c.weights.bce_reduction == BceReduction::Mean ? "mean" : "sum") << '\n'
       << "m2s_cycle_literal = " << (c.weights.m2s_cycle_literal ? "true" : "false") << '\n'
       << "max_translate_px = " << c.augment.max_translate_px << '\n'
       << "hflip_p = " << c.augment.hflip_p << '\n'
       << "rot90 = " << (c.augment.rot90 ? "true" : "false") << '\n'
       << "max_brightness = " << c.augment.max_brightness << '\n'
       << "max_contrast = " << c.augment.max_contrast << '\n'
       << "max_hue = " << c.augment.max_hue << '\n'
       << "max_saturation = " << c.augment.max_saturation << '\n'
       << "style_channel = " << (c.augment.style_channel ? "true" : "false") << '\n';
    return os.str();
}

inline int64_t hash(const TrainingConfig& c) {
    const std::string s = serialize(c);
    return static_cast<int64_t>(fnv1a(s.data(), s.size()));
}

}  // namespace config

}  // namespace tricycle
