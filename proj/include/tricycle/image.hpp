#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace tricycle {

// Seeded random source. Every sampling function takes one of these explicitly;
// workers that need independent streams own independent engines.
using Rng = std::mt19937_64;

// Planar float image, values conventionally in [0,1]. Channel-major layout
// (c, then row, then column) so conversion to tensor layouts is a straight copy.
//
// Semantic aliases below document intent:
//   MaskImage   - single channel, strictly {0,1}
//   EdgeImage   - single channel, edge strength in [0,1]
//   DomainImage - 1 channel (ultrasound) or 3 channels (dermoscopy)
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<float> data;

    Image() = default;
    Image(int h, int w, int c = 1, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {
        if (h <= 0 || w <= 0 || c <= 0)
            throw std::invalid_argument("Image: dimensions must be positive");
    }

    float& at(int y, int x, int c = 0) {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }
    float at(int y, int x, int c = 0) const {
        return data[(static_cast<size_t>(c) * height + y) * width + x];
    }

    size_t plane_size() const { return static_cast<size_t>(height) * width; }
    size_t size() const { return data.size(); }

    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    bool is_binary() const {
        return std::all_of(data.begin(), data.end(),
                           [](float v) { return v == 0.0f || v == 1.0f; });
    }

    // Foreground pixel count of a binary mask (first channel).
    long long foreground_count() const {
        long long n = 0;
        for (size_t i = 0; i < plane_size(); ++i)
            if (data[i] != 0.0f) ++n;
        return n;
    }

    float max_value() const {
        return data.empty() ? 0.0f : *std::max_element(data.begin(), data.end());
    }
    float min_value() const {
        return data.empty() ? 0.0f : *std::min_element(data.begin(), data.end());
    }

    double mean() const {
        if (data.empty()) return 0.0;
        double s = 0.0;
        for (float v : data) s += v;
        return s / static_cast<double>(data.size());
    }

    void clamp01() {
        for (float& v : data) v = std::clamp(v, 0.0f, 1.0f);
    }
};

using MaskImage = Image;
using EdgeImage = Image;
using DomainImage = Image;

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

inline void require_binary(const Image& m, const char* what) {
    if (m.channels != 1 || !m.is_binary())
        throw std::invalid_argument(std::string(what) + ": mask must be single-channel binary");
}

// Logical AND of two binary masks.
inline MaskImage mask_and(const MaskImage& a, const MaskImage& b) {
    require_same_shape(a, b, "mask_and");
    MaskImage out(a.height, a.width, 1);
    for (size_t i = 0; i < a.data.size(); ++i)
        out.data[i] = (a.data[i] != 0.0f && b.data[i] != 0.0f) ? 1.0f : 0.0f;
    return out;
}

inline MaskImage binarize(const Image& soft, float threshold = 0.5f) {
    MaskImage out(soft.height, soft.width, 1);
    for (size_t i = 0; i < soft.plane_size(); ++i)
        out.data[i] = soft.data[i] > threshold ? 1.0f : 0.0f;
    return out;
}

// Uniform draw from [lo, hi).
inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Uniform integer draw from [lo, hi] inclusive.
inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// FNV-1a over the raw bytes of a float buffer; used for parameter checksums.
inline uint64_t fnv1a(const void* bytes, size_t n, uint64_t seed = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace tricycle
