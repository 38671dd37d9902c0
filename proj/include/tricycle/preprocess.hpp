#pragma once

#include "tricycle/clahe.hpp"
#include "tricycle/image.hpp"
#include "tricycle/image_io.hpp"

namespace tricycle {

enum class Despeckle { Off, Median3 };

struct PreprocessSpec {
    double percentile_lo = 2.0;
    double percentile_hi = 98.0;
    bool clahe_enabled = true;
    double clahe_clip = 0.03;
    int clahe_grid = 8;
    Despeckle despeckle = Despeckle::Median3;
    int target_size = 256;
    // When set, mean/sd statistics of the training split are applied at the
    // tensor boundary (stored in the checkpoint), not in this pipeline.
    bool normalize_mean_sd = false;
};

inline void validate(const PreprocessSpec& s) {
    if (!(0.0 <= s.percentile_lo && s.percentile_lo < s.percentile_hi &&
          s.percentile_hi <= 100.0))
        throw std::invalid_argument("preprocess: need 0 <= lo < hi <= 100");
    if (s.target_size < 1)
        throw std::invalid_argument("preprocess: target_size must be positive");
}

// Percentile of the pooled pixel values (linear interpolation between order
// statistics).
inline double percentile(const Image& img, double p) {
    std::vector<float> v(img.data);
    if (v.empty()) return 0.0;
    const double rank = p / 100.0 * (static_cast<double>(v.size()) - 1.0);
    const size_t lo = static_cast<size_t>(rank);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    std::nth_element(v.begin(), v.begin() + lo, v.end());
    const float a = v[lo];
    std::nth_element(v.begin(), v.begin() + hi, v.end());
    const float b = v[hi];
    return a + (rank - static_cast<double>(lo)) * (b - a);
}

// Trim to [p_lo, p_hi] then rescale to [0,1]; constant images map to zero.
inline Image percentile_trim(const Image& img, double lo_pct, double hi_pct) {
    const double lo = percentile(img, lo_pct);
    const double hi = percentile(img, hi_pct);
    Image out = img;
    const double range = hi - lo;
    if (range < 1e-12) {
        std::fill(out.data.begin(), out.data.end(), 0.0f);
        return out;
    }
    for (float& v : out.data)
        v = static_cast<float>(std::clamp((v - lo) / range, 0.0, 1.0));
    return out;
}

// Intensity trim -> despeckle -> CLAHE -> resize. Mean/sd normalization, when
// enabled, happens later with training-split statistics.
inline DomainImage preprocess(const Image& raw, const PreprocessSpec& spec) {
    validate(spec);
    Image img = percentile_trim(raw, spec.percentile_lo, spec.percentile_hi);
    if (spec.despeckle == Despeckle::Median3) img = median3x3(img);
    if (spec.clahe_enabled) {
        if (img.channels == 1) {
            img = clahe(img, spec.clahe_clip, spec.clahe_grid);
        } else {
            Image out(img.height, img.width, img.channels);
            for (int c = 0; c < img.channels; ++c) {
                Image ch(img.height, img.width, 1);
                std::copy_n(img.data.begin() + c * img.plane_size(), img.plane_size(),
                            ch.data.begin());
                Image eq = clahe(ch, spec.clahe_clip, spec.clahe_grid);
                std::copy_n(eq.data.begin(), eq.plane_size(),
                            out.data.begin() + c * out.plane_size());
            }
            img = std::move(out);
        }
    }
    img = resize_image(img, spec.target_size);
    img.clamp01();
    return img;
}

// Dataset-level intensity statistics, computed on the training split only.
struct NormStats {
    double mean = 0.0;
    double sd = 1.0;
};

inline NormStats compute_norm_stats(const std::vector<Image>& images) {
    double s = 0.0, n = 0.0;
    for (const auto& img : images) {
        for (float v : img.data) s += v;
        n += static_cast<double>(img.size());
    }
    NormStats st;
    st.mean = n > 0 ? s / n : 0.0;
    double ss = 0.0;
    for (const auto& img : images)
        for (float v : img.data) ss += (v - st.mean) * (v - st.mean);
    st.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 1.0;
    if (st.sd < 1e-8) st.sd = 1.0;
    return st;
}

}  // namespace tricycle
