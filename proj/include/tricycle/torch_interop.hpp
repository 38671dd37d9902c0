#pragma once

#include <torch/torch.h>

#include "tricycle/image.hpp"

namespace tricycle {

// Image -> (1, C, H, W) float tensor. Layouts match, so this is one copy.
inline torch::Tensor to_tensor(const Image& img,
                               torch::Dtype dtype = torch::kF32) {
    auto t = torch::from_blob(const_cast<float*>(img.data.data()),
                              {1, img.channels, img.height, img.width},
                              torch::kF32)
                 .clone();
    return dtype == torch::kF32 ? t : t.to(dtype);
}

// (1, C, H, W) or (C, H, W) tensor -> Image.
inline Image to_image(const torch::Tensor& t) {
    auto x = t.dim() == 4 ? t.squeeze(0) : t;
    TORCH_CHECK(x.dim() == 3, "to_image: expected CHW tensor");
    x = x.to(torch::kF32).contiguous();
    Image img(static_cast<int>(x.size(1)), static_cast<int>(x.size(2)),
              static_cast<int>(x.size(0)));
    std::memcpy(img.data.data(), x.data_ptr<float>(), img.size() * sizeof(float));
    return img;
}

inline torch::Tensor stack_batch(const std::vector<torch::Tensor>& singles) {
    return torch::cat(singles, 0);
}

// Differentiable counterpart of the classical Sobel edge extraction:
// 3x3 gradient magnitude with replicate padding, normalized per sample by its
// own maximum (floored). On a binary mask this matches sobel_mask_to_edges.
inline torch::Tensor sobel_edges_tensor(const torch::Tensor& x) {
    TORCH_CHECK(x.dim() == 4, "sobel_edges_tensor: expected NCHW");
    const auto dtype = x.dtype().toScalarType();
    auto kx = torch::tensor({{-1.f, 0.f, 1.f}, {-2.f, 0.f, 2.f}, {-1.f, 0.f, 1.f}},
                            torch::TensorOptions().dtype(dtype))
                  .view({1, 1, 3, 3});
    auto ky = torch::tensor({{-1.f, -2.f, -1.f}, {0.f, 0.f, 0.f}, {1.f, 2.f, 1.f}},
                            torch::TensorOptions().dtype(dtype))
                  .view({1, 1, 3, 3});
    auto gray = x.size(1) == 1 ? x : x.mean(1, /*keepdim=*/true);
    auto padded = torch::nn::functional::pad(
        gray, torch::nn::functional::PadFuncOptions({1, 1, 1, 1})
                  .mode(torch::kReplicate));
    auto gx = torch::conv2d(padded, kx);
    auto gy = torch::conv2d(padded, ky);
    auto mag = torch::sqrt(gx * gx + gy * gy + 1e-20);
    auto mx = std::get<0>(mag.flatten(1).max(1)).view({-1, 1, 1, 1});
    return mag / mx.clamp_min(1e-8);
}

// Differentiable occlusion: multiply by a {0,1} keep-mask built from the
// squares. Gradients pass through the kept pixels only.
inline torch::Tensor keep_mask_for(const torch::Tensor& like,
                                   const std::vector<std::array<int, 3>>& squares) {
    auto keep = torch::ones({1, 1, like.size(2), like.size(3)}, like.options());
    for (const auto& [sx, sy, side] : squares)
        keep.index_put_({0, 0,
                         torch::indexing::Slice(sy, sy + side),
                         torch::indexing::Slice(sx, sx + side)},
                        0);
    return keep;
}

}  // namespace tricycle
