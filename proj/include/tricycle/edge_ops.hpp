#pragma once

#include <functional>
#include <map>
#include <string>

#include "tricycle/image.hpp"

namespace tricycle {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// 3x3 Sobel gradient magnitude with replicate border handling.
inline Image sobel_magnitude(const Image& gray) {
    Image mag(gray.height, gray.width, 1);
    const int H = gray.height, W = gray.width;
    auto px = [&](int y, int x) {
        y = std::clamp(y, 0, H - 1);
        x = std::clamp(x, 0, W - 1);
        return static_cast<double>(gray.at(y, x));
    };
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
            const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
            mag.at(y, x) = static_cast<float>(std::sqrt(gx * gx + gy * gy));
        }
    }
    return mag;
}

inline Image to_gray(const Image& img) {
    if (img.channels == 1) return img;
    Image gray(img.height, img.width, 1);
    for (size_t i = 0; i < gray.plane_size(); ++i) {
        double s = 0.0;
        for (int c = 0; c < img.channels; ++c)
            s += img.data[c * gray.plane_size() + i];
        gray.data[i] = static_cast<float>(s / img.channels);
    }
    return gray;
}

constexpr float kNormFloor = 1e-8f;

// Divide by the per-image maximum (with a floor so constant images map to the
// zero edge map).
inline void normalize_by_max(Image& img) {
    const float m = std::max(img.max_value(), kNormFloor);
    for (float& v : img.data) v /= m;
}

inline Image sobel_backend(const Image& img) {
    Image mag = sobel_magnitude(to_gray(img));
    normalize_by_max(mag);
    return mag;
}

// Sobel magnitude followed by hysteresis: strong pixels (>= hi * max) seed
// regions grown through weak pixels (>= lo * max). Output stays in [0,1].
inline Image sobel_hysteresis_backend(const Image& img) {
    Image mag = sobel_magnitude(to_gray(img));
    normalize_by_max(mag);
    const float lo = 0.1f, hi = 0.3f;
    const int H = mag.height, W = mag.width;
    std::vector<char> keep(mag.plane_size(), 0);
    std::vector<int> stack;
    for (int i = 0; i < static_cast<int>(mag.plane_size()); ++i) {
        if (mag.data[i] >= hi) {
            keep[i] = 1;
            stack.push_back(i);
        }
    }
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int y = i / W, x = i % W;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int ny = y + dy, nx = x + dx;
                if (ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
                const int ni = ny * W + nx;
                if (!keep[ni] && mag.data[ni] >= lo) {
                    keep[ni] = 1;
                    stack.push_back(ni);
                }
            }
        }
    }
    Image out(H, W, 1);
    for (size_t i = 0; i < out.plane_size(); ++i)
        out.data[i] = keep[i] ? mag.data[i] : 0.0f;
    return out;
}

}  // namespace detail

using EdgeBackend = std::function<EdgeImage(const DomainImage&)>;

inline std::map<std::string, EdgeBackend>& edge_backend_registry() {
    static std::map<std::string, EdgeBackend> registry = {
        {"sobel", detail::sobel_backend},
        {"sobel_hysteresis", detail::sobel_hysteresis_backend},
    };
    return registry;
}

// Gradient-magnitude edge map in [0,1], normalized by its own maximum.
// Multi-channel images are reduced to their channel mean first.
inline EdgeImage extract_edges(const DomainImage& image,
                               const std::string& backend = "sobel") {
    auto& reg = edge_backend_registry();
    auto it = reg.find(backend);
    if (it == reg.end())
        throw ConfigError("extract_edges: unknown backend '" + backend + "'");
    return it->second(image);
}

// Mask boundary as an edge map: Sobel responds only within one pixel of the
// label-change interface.
inline EdgeImage sobel_mask_to_edges(const MaskImage& mask) {
    Image mag = detail::sobel_magnitude(mask);
    detail::normalize_by_max(mag);
    return mag;
}

// Axis-aligned occlusion square, fully inside the image.
struct OcclusionSquare {
    int x = 0;
    int y = 0;
    int side = 0;
};

struct OcclusionSet {
    std::vector<OcclusionSquare> squares;
};

inline bool squares_overlap(const OcclusionSquare& a, const OcclusionSquare& b) {
    // Zero-area intersection (shared edges) does not count as overlap.
    return a.x < b.x + b.side && b.x < a.x + a.side &&
           a.y < b.y + b.side && b.y < a.y + a.side;
}

// Up to 10 pairwise-disjoint squares with side in [L/8, L/2]. Placement is
// rejection sampling, 50 attempts per square; unplaceable squares are dropped.
inline OcclusionSet sample_occlusions(Rng& rng, int size) {
    if (size < 16)
        throw std::invalid_argument("sample_occlusions: size must be >= 16");
    const int lo = std::max(1, size / 8);
    const int hi = size / 2;
    const int want = uniform_int(rng, 1, 10);
    OcclusionSet set;
    for (int k = 0; k < want; ++k) {
        for (int attempt = 0; attempt < 50; ++attempt) {
            OcclusionSquare sq;
            sq.side = uniform_int(rng, lo, hi);
            sq.x = uniform_int(rng, 0, size - sq.side);
            sq.y = uniform_int(rng, 0, size - sq.side);
            const bool clash = std::any_of(
                set.squares.begin(), set.squares.end(),
                [&](const OcclusionSquare& o) { return squares_overlap(sq, o); });
            if (!clash) {
                set.squares.push_back(sq);
                break;
            }
        }
    }
    return set;
}

// Zero out every pixel inside an occlusion square; everything else is
// bit-identical to the input.
inline EdgeImage apply_occlusion(const EdgeImage& edges, const OcclusionSet& occ) {
    for (const auto& sq : occ.squares) {
        if (sq.x < 0 || sq.y < 0 || sq.side <= 0 ||
            sq.x + sq.side > edges.width || sq.y + sq.side > edges.height)
            throw std::invalid_argument("apply_occlusion: square out of bounds");
    }
    EdgeImage out = edges;
    for (const auto& sq : occ.squares)
        for (int y = sq.y; y < sq.y + sq.side; ++y)
            for (int x = sq.x; x < sq.x + sq.side; ++x)
                for (int c = 0; c < out.channels; ++c)
                    out.at(y, x, c) = 0.0f;
    return out;
}

}  // namespace tricycle
