#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <sstream>

#include "tricycle/networks.hpp"

namespace tricycle {

enum class GeneratorRole { S2E, PF, E2M, M2S };
enum class DiscriminatorRole { DS2E, DE2M };

inline const char* role_name(GeneratorRole r) {
    switch (r) {
        case GeneratorRole::S2E: return "g_s2e";
        case GeneratorRole::PF: return "g_pf";
        case GeneratorRole::E2M: return "g_e2m";
        case GeneratorRole::M2S: return "g_m2s";
    }
    return "?";
}
inline const char* role_name(DiscriminatorRole r) {
    return r == DiscriminatorRole::DS2E ? "d_s2e" : "d_e2m";
}

// A generator plus its role and freeze state. The wrapped module is type
// erased so tests can substitute stubs. All chain-level outputs live in
// [0,1]: tanh outputs are rescaled at this boundary.
struct GeneratorHandle {
    GeneratorRole role = GeneratorRole::S2E;
    NetworkSpec spec;
    bool frozen = false;
    torch::nn::AnyModule net;

    bool has_net() const { return !net.is_empty(); }

    void check_input(const torch::Tensor& x) const {
        if (x.dim() != 4 || x.size(1) != spec.in_channels)
            throw std::invalid_argument(std::string(role_name(role)) +
                                        ": input channel mismatch");
    }

    // Raw network output, in the activation's own range.
    torch::Tensor forward_raw(const torch::Tensor& x) {
        check_input(x);
        return net.forward(x);
    }

    torch::Tensor to_unit(torch::Tensor y) const {
        return spec.output_activation == OutputActivation::BoundedSymmetric
                   ? (y + 1.0) * 0.5
                   : y;
    }

    // Training-mode forward with gradients, output rescaled to [0,1].
    torch::Tensor forward_train(const torch::Tensor& x) {
        net.ptr()->train(true);
        return to_unit(forward_raw(x));
    }

    // Deterministic eval-mode translation, output in [0,1], no gradients.
    torch::Tensor translate(const torch::Tensor& x) {
        torch::NoGradGuard guard;
        net.ptr()->eval();
        return to_unit(forward_raw(x));
    }

    std::vector<torch::Tensor> parameters() const { return net.ptr()->parameters(); }

    void set_frozen(bool f) {
        frozen = f;
        for (auto& p : parameters()) p.set_requires_grad(!f);
    }

    uint64_t checksum() const {
        uint64_t h = 1469598103934665603ull;
        for (const auto& p : parameters()) {
            auto t = p.detach().to(torch::kCPU).contiguous();
            h = fnv1a(t.data_ptr(), t.numel() * t.element_size(), h);
        }
        return h;
    }
};

// Patch discriminator over a (source, candidate) channel concatenation.
struct DiscriminatorHandle {
    DiscriminatorRole role = DiscriminatorRole::DS2E;
    NetworkSpec spec;
    torch::nn::AnyModule net;

    torch::Tensor score(const torch::Tensor& source, const torch::Tensor& candidate) {
        auto x = torch::cat({source, candidate}, 1);
        if (x.size(1) != spec.in_channels)
            throw std::invalid_argument(std::string(role_name(role)) +
                                        ": conditional channel mismatch");
        return net.forward(x);
    }

    std::vector<torch::Tensor> parameters() const { return net.ptr()->parameters(); }

    uint64_t checksum() const {
        uint64_t h = 1469598103934665603ull;
        for (const auto& p : parameters()) {
            auto t = p.detach().to(torch::kCPU).contiguous();
            h = fnv1a(t.data_ptr(), t.numel() * t.element_size(), h);
        }
        return h;
    }
};

// The four generators and two discriminators of the tricycle, plus the epoch
// counter. Single-writer: one training loop mutates parameters; concurrent
// read-only inference is fine on a frozen copy.
struct ModelBundle {
    GeneratorHandle g_s2e, g_pf, g_e2m, g_m2s;
    DiscriminatorHandle d_s2e, d_e2m;
    int64_t epoch = 0;
    int domain_channels = 1;
    double norm_mean = 0.0;  // training-split stats, when normalization is on
    double norm_sd = 1.0;
};

inline GeneratorHandle build_generator(const NetworkSpec& spec, GeneratorRole role) {
    validate_network_spec(spec);
    GeneratorHandle h;
    h.role = role;
    h.spec = spec;
    auto mod = nets::UnetGenerator(spec);
    nets::init_weights(*mod);
    h.net = torch::nn::AnyModule(mod);
    return h;
}

inline DiscriminatorHandle build_discriminator(const NetworkSpec& spec,
                                               DiscriminatorRole role) {
    validate_network_spec(spec);
    DiscriminatorHandle h;
    h.role = role;
    h.spec = spec;
    auto mod = nets::PatchDiscriminator(spec);
    nets::init_weights(*mod);
    h.net = torch::nn::AnyModule(mod);
    return h;
}

constexpr int kDiscriminatorDepth = 3;

// Channel layout: g_s2e 1->1, g_pf 1->1, g_e2m 1->C, g_m2s C->1.
// Discriminators are conditional and see source+candidate concatenations.
inline ModelBundle build_model_bundle(int image_size, int domain_channels,
                                      int base_width, int depth) {
    ModelBundle b;
    b.domain_channels = domain_channels;
    NetworkSpec g;
    g.image_size = image_size;
    g.base_width = base_width;
    g.depth = depth;

    NetworkSpec s2e = g;
    s2e.in_channels = 1;
    s2e.out_channels = 1;
    s2e.output_activation = OutputActivation::BoundedSymmetric;
    b.g_s2e = build_generator(s2e, GeneratorRole::S2E);

    NetworkSpec pf = s2e;
    b.g_pf = build_generator(pf, GeneratorRole::PF);

    NetworkSpec e2m = g;
    e2m.in_channels = 1;
    e2m.out_channels = domain_channels;
    e2m.output_activation = OutputActivation::BoundedSymmetric;
    b.g_e2m = build_generator(e2m, GeneratorRole::E2M);

    NetworkSpec m2s = g;
    m2s.in_channels = domain_channels;
    m2s.out_channels = 1;
    m2s.output_activation = OutputActivation::BoundedUnit;
    b.g_m2s = build_generator(m2s, GeneratorRole::M2S);

    NetworkSpec ds2e = g;
    ds2e.in_channels = 2;  // source mask/edge + candidate edge
    ds2e.depth = kDiscriminatorDepth;
    b.d_s2e = build_discriminator(ds2e, DiscriminatorRole::DS2E);

    NetworkSpec de2m = g;
    de2m.in_channels = 1 + domain_channels;  // source edge + candidate image
    de2m.depth = kDiscriminatorDepth;
    b.d_e2m = build_discriminator(de2m, DiscriminatorRole::DE2M);
    return b;
}

// One Adam per trainable network; g_pf gets its own only during pretraining.
struct OptimizerSet {
    std::unique_ptr<torch::optim::Adam> g_s2e, g_e2m, g_m2s, d_s2e, d_e2m;
};

inline OptimizerSet make_optimizers(ModelBundle& b, double lr) {
    OptimizerSet o;
    o.g_s2e = std::make_unique<torch::optim::Adam>(b.g_s2e.parameters(), lr);
    o.g_e2m = std::make_unique<torch::optim::Adam>(b.g_e2m.parameters(), lr);
    o.g_m2s = std::make_unique<torch::optim::Adam>(b.g_m2s.parameters(), lr);
    o.d_s2e = std::make_unique<torch::optim::Adam>(b.d_s2e.parameters(), lr);
    o.d_e2m = std::make_unique<torch::optim::Adam>(b.d_e2m.parameters(), lr);
    return o;
}

inline constexpr const char* kCheckpointVersion = "tricycle-checkpoint/1";

namespace detail {

inline void write_module(torch::serialize::OutputArchive& root, const char* key,
                         const std::shared_ptr<torch::nn::Module>& m) {
    torch::serialize::OutputArchive sub(root.compilation_unit());
    m->save(sub);
    root.write(key, sub);
}

inline void read_module(torch::serialize::InputArchive& root, const char* key,
                        const std::shared_ptr<torch::nn::Module>& m) {
    torch::serialize::InputArchive sub;
    root.read(key, sub);
    m->load(sub);
}

inline void write_optimizer(torch::serialize::OutputArchive& root, const std::string& key,
                            torch::optim::Adam& opt) {
    torch::serialize::OutputArchive sub(root.compilation_unit());
    opt.save(sub);
    root.write(key, sub);
}

inline bool read_optimizer(torch::serialize::InputArchive& root, const std::string& key,
                           torch::optim::Adam& opt) {
    torch::serialize::InputArchive sub;
    if (!root.try_read(key, sub)) return false;
    opt.load(sub);
    return true;
}

}  // namespace detail

// Keyed single-file archive: one nested entry per network (keys are the role
// names), optional optimizer entries, plus build metadata so the bundle can
// be reconstructed before loading parameters.
inline void save_checkpoint(const std::filesystem::path& path, const ModelBundle& b,
                            const OptimizerSet* opts = nullptr,
                            int64_t config_hash = 0) {
    torch::serialize::OutputArchive a;
    a.write("version", c10::IValue(std::string(kCheckpointVersion)));
    a.write("epoch", c10::IValue(b.epoch));
    a.write("config_hash", c10::IValue(config_hash));
    a.write("image_size", c10::IValue(static_cast<int64_t>(b.g_s2e.spec.image_size)));
    a.write("domain_channels", c10::IValue(static_cast<int64_t>(b.domain_channels)));
    a.write("base_width", c10::IValue(static_cast<int64_t>(b.g_s2e.spec.base_width)));
    a.write("depth", c10::IValue(static_cast<int64_t>(b.g_s2e.spec.depth)));
    a.write("pf_frozen", c10::IValue(b.g_pf.frozen));
    a.write("norm_mean", c10::IValue(b.norm_mean));
    a.write("norm_sd", c10::IValue(b.norm_sd));
    detail::write_module(a, "g_s2e", b.g_s2e.net.ptr());
    detail::write_module(a, "g_pf", b.g_pf.net.ptr());
    detail::write_module(a, "g_e2m", b.g_e2m.net.ptr());
    detail::write_module(a, "g_m2s", b.g_m2s.net.ptr());
    detail::write_module(a, "d_s2e", b.d_s2e.net.ptr());
    detail::write_module(a, "d_e2m", b.d_e2m.net.ptr());
    if (opts) {
        detail::write_optimizer(a, "opt_g_s2e", *opts->g_s2e);
        detail::write_optimizer(a, "opt_g_e2m", *opts->g_e2m);
        detail::write_optimizer(a, "opt_g_m2s", *opts->g_m2s);
        detail::write_optimizer(a, "opt_d_s2e", *opts->d_s2e);
        detail::write_optimizer(a, "opt_d_e2m", *opts->d_e2m);
    }
    if (!path.parent_path().empty())
        std::filesystem::create_directories(path.parent_path());
    a.save_to(path.string());
}

struct LoadedCheckpoint {
    ModelBundle bundle;
    int64_t config_hash = 0;
    bool has_optimizers = false;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                        OptimizerSet* opts = nullptr,
                                        double lr_for_opts = 2e-4) {
    torch::serialize::InputArchive a;
    a.load_from(path.string());
    c10::IValue v;
    a.read("version", v);
    if (v.toStringRef() != kCheckpointVersion)
        throw std::runtime_error("load_checkpoint: unsupported version " + v.toStringRef());
    auto read_i64 = [&](const char* key) {
        c10::IValue iv;
        a.read(key, iv);
        return iv.toInt();
    };
    auto read_f64 = [&](const char* key) {
        c10::IValue iv;
        a.read(key, iv);
        return iv.toDouble();
    };
    LoadedCheckpoint out;
    const auto image_size = static_cast<int>(read_i64("image_size"));
    const auto domain_channels = static_cast<int>(read_i64("domain_channels"));
    const auto base_width = static_cast<int>(read_i64("base_width"));
    const auto depth = static_cast<int>(read_i64("depth"));
    out.bundle = build_model_bundle(image_size, domain_channels, base_width, depth);
    out.bundle.epoch = read_i64("epoch");
    out.config_hash = read_i64("config_hash");
    out.bundle.norm_mean = read_f64("norm_mean");
    out.bundle.norm_sd = read_f64("norm_sd");
    detail::read_module(a, "g_s2e", out.bundle.g_s2e.net.ptr());
    detail::read_module(a, "g_pf", out.bundle.g_pf.net.ptr());
    detail::read_module(a, "g_e2m", out.bundle.g_e2m.net.ptr());
    detail::read_module(a, "g_m2s", out.bundle.g_m2s.net.ptr());
    detail::read_module(a, "d_s2e", out.bundle.d_s2e.net.ptr());
    detail::read_module(a, "d_e2m", out.bundle.d_e2m.net.ptr());
    c10::IValue frozen;
    a.read("pf_frozen", frozen);
    out.bundle.g_pf.set_frozen(frozen.toBool());
    if (opts) {
        *opts = make_optimizers(out.bundle, lr_for_opts);
        out.has_optimizers = detail::read_optimizer(a, "opt_g_s2e", *opts->g_s2e);
        detail::read_optimizer(a, "opt_g_e2m", *opts->g_e2m);
        detail::read_optimizer(a, "opt_g_m2s", *opts->g_m2s);
        detail::read_optimizer(a, "opt_d_s2e", *opts->d_s2e);
        detail::read_optimizer(a, "opt_d_e2m", *opts->d_e2m);
    }
    return out;
}

// In-memory checkpoint round trip, for keeping the best epoch without disk.
inline std::string bundle_to_bytes(const ModelBundle& b) {
    torch::serialize::OutputArchive a;
    detail::write_module(a, "g_s2e", b.g_s2e.net.ptr());
    detail::write_module(a, "g_pf", b.g_pf.net.ptr());
    detail::write_module(a, "g_e2m", b.g_e2m.net.ptr());
    detail::write_module(a, "g_m2s", b.g_m2s.net.ptr());
    detail::write_module(a, "d_s2e", b.d_s2e.net.ptr());
    detail::write_module(a, "d_e2m", b.d_e2m.net.ptr());
    std::ostringstream os;
    a.save_to(os);
    return os.str();
}

inline void bundle_from_bytes(ModelBundle& b, const std::string& bytes) {
    std::istringstream is(bytes);
    torch::serialize::InputArchive a;
    a.load_from(is);
    detail::read_module(a, "g_s2e", b.g_s2e.net.ptr());
    detail::read_module(a, "g_pf", b.g_pf.net.ptr());
    detail::read_module(a, "g_e2m", b.g_e2m.net.ptr());
    detail::read_module(a, "g_m2s", b.g_m2s.net.ptr());
    detail::read_module(a, "d_s2e", b.d_s2e.net.ptr());
    detail::read_module(a, "d_e2m", b.d_e2m.net.ptr());
}

}  // namespace tricycle
