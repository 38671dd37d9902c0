#pragma once

#include <torch/torch.h>

#include "tricycle/edge_ops.hpp"  // ConfigError

namespace tricycle {

enum class OutputActivation { BoundedSymmetric, BoundedUnit };  // tanh / sigmoid

struct NetworkSpec {
    int in_channels = 1;
    int out_channels = 1;
    int image_size = 256;  // power of two, >= 32
    int base_width = 64;   // feature channels at the first level
    int depth = 6;         // down/up levels (generators) or strided convs (discriminators)
    OutputActivation output_activation = OutputActivation::BoundedSymmetric;
};

inline void validate_network_spec(const NetworkSpec& s) {
    const bool pow2 = s.image_size >= 32 && (s.image_size & (s.image_size - 1)) == 0;
    if (!pow2)
        throw ConfigError("NetworkSpec: image_size must be a power of two >= 32");
    if (s.depth < 2 || s.base_width < 8)
        throw ConfigError("NetworkSpec: need depth >= 2 and base_width >= 8");
    if (s.image_size % (1 << s.depth) != 0)
        throw ConfigError("NetworkSpec: image_size must be divisible by 2^depth");
    if (s.in_channels < 1 || s.out_channels < 1)
        throw ConfigError("NetworkSpec: channel counts must be positive");
}

namespace nets {

// One level of the skip-connected encoder-decoder: down-convolution,
// recursive submodule, up-convolution; non-outermost levels concatenate
// their input onto the upsampled output (the U-Net skip).
struct UnetBlockImpl : torch::nn::Module {
    torch::nn::Sequential model{nullptr};
    bool outermost = false;

    UnetBlockImpl() = default;
    UnetBlockImpl(int outer_nc, int inner_nc, int input_nc,
                  std::shared_ptr<UnetBlockImpl> submodule, bool outermost_,
                  bool innermost, bool use_dropout, OutputActivation activation) {
        outermost = outermost_;
        using namespace torch::nn;
        auto norm = [](int nc) { return InstanceNorm2d(InstanceNorm2dOptions(nc)); };
        auto conv = [](int in, int out) {
            return Conv2d(Conv2dOptions(in, out, 4).stride(2).padding(1));
        };
        auto deconv = [](int in, int out) {
            return ConvTranspose2d(ConvTranspose2dOptions(in, out, 4).stride(2).padding(1));
        };

        Sequential seq;
        if (outermost_) {
            seq->push_back(conv(input_nc, inner_nc));
            seq->push_back(submodule);
            seq->push_back(ReLU());
            seq->push_back(deconv(inner_nc * 2, outer_nc));
            if (activation == OutputActivation::BoundedSymmetric)
                seq->push_back(Tanh());
            else
                seq->push_back(Sigmoid());
        } else if (innermost) {
            seq->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
            seq->push_back(conv(input_nc, inner_nc));
            seq->push_back(ReLU());
            seq->push_back(deconv(inner_nc, outer_nc));
            seq->push_back(norm(outer_nc));
        } else {
            seq->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
            seq->push_back(conv(input_nc, inner_nc));
            seq->push_back(norm(inner_nc));
            seq->push_back(submodule);
            seq->push_back(ReLU());
            seq->push_back(deconv(inner_nc * 2, outer_nc));
            seq->push_back(norm(outer_nc));
            if (use_dropout) seq->push_back(Dropout(0.5));
        }
        model = register_module("model", seq);
    }

    torch::Tensor forward(torch::Tensor x) {
        if (outermost) return model->forward(x);
        return torch::cat({x, model->forward(x)}, 1);
    }
};
TORCH_MODULE(UnetBlock);

// Encoder-decoder generator with skip connections. Feature widths double per
// level, capped at 8x the base width; dropout on the up-path levels nearest
// the bottleneck doubles as the noise source during training.
struct UnetGeneratorImpl : torch::nn::Module {
    UnetBlock core{nullptr};
    NetworkSpec spec;

    UnetGeneratorImpl() = default;
    explicit UnetGeneratorImpl(const NetworkSpec& s) : spec(s) {
        validate_network_spec(s);
        auto width = [&](int level) {
            return s.base_width * std::min(1 << level, 8);
        };
        const int d = s.depth;
        auto block = std::make_shared<UnetBlockImpl>(
            width(d - 2), width(d - 1), width(d - 2), nullptr,
            false, true, false, s.output_activation);
        for (int level = d - 2; level >= 1; --level) {
            const bool dropout = level >= std::max(1, d - 4);
            block = std::make_shared<UnetBlockImpl>(
                width(level - 1), width(level), width(level - 1), block,
                false, false, dropout, s.output_activation);
        }
        auto outer = std::make_shared<UnetBlockImpl>(
            s.out_channels, width(0), s.in_channels, block,
            true, false, false, s.output_activation);
        core = register_module("core", UnetBlock(outer));
    }

    torch::Tensor forward(torch::Tensor x) { return core->forward(x); }
};
TORCH_MODULE(UnetGenerator);

// Patch discriminator: `depth` strided convolutions followed by two stride-1
// convolutions, so a size-L input yields an (L / 2^depth - 2) square grid of
// unbounded patch scores.
struct PatchDiscriminatorImpl : torch::nn::Module {
    torch::nn::Sequential model;
    NetworkSpec spec;

    PatchDiscriminatorImpl() = default;
    explicit PatchDiscriminatorImpl(const NetworkSpec& s) : spec(s) {
        validate_network_spec(s);
        using namespace torch::nn;
        auto width = [&](int level) {
            return s.base_width * std::min(1 << level, 8);
        };
        model->push_back(Conv2d(Conv2dOptions(s.in_channels, width(0), 4).stride(2).padding(1)));
        model->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
        for (int level = 1; level < s.depth; ++level) {
            model->push_back(Conv2d(Conv2dOptions(width(level - 1), width(level), 4)
                                        .stride(2).padding(1)));
            model->push_back(InstanceNorm2d(InstanceNorm2dOptions(width(level))));
            model->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
        }
        model->push_back(Conv2d(Conv2dOptions(width(s.depth - 1), width(s.depth), 4)
                                    .stride(1).padding(1)));
        model->push_back(InstanceNorm2d(InstanceNorm2dOptions(width(s.depth))));
        model->push_back(LeakyReLU(LeakyReLUOptions().negative_slope(0.2)));
        model->push_back(Conv2d(Conv2dOptions(width(s.depth), 1, 4).stride(1).padding(1)));
        register_module("model", model);
    }

    torch::Tensor forward(torch::Tensor x) { return model->forward(x); }
};
TORCH_MODULE(PatchDiscriminator);

inline int patch_grid_size(int image_size, int depth) {
    return image_size / (1 << depth) - 2;
}

// pix2pix initialization: zero-mean gaussians on all convolution kernels.
inline void init_weights(torch::nn::Module& m, double gain = 0.02) {
    for (auto& p : m.named_parameters(/*recurse=*/true)) {
        torch::NoGradGuard guard;
        if (p.key().find("weight") != std::string::npos && p.value().dim() >= 2)
            p.value().normal_(0.0, gain);
        else if (p.key().find("bias") != std::string::npos)
            p.value().zero_();
    }
}

// Test stub: forwards its input unchanged.
struct IdentityNetImpl : torch::nn::Module {
    torch::Tensor forward(torch::Tensor x) { return x; }
};
TORCH_MODULE(IdentityNet);

}  // namespace nets

}  // namespace tricycle
