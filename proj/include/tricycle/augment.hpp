#pragma once

#include <array>
#include <optional>

#include "tricycle/image.hpp"

namespace tricycle {

struct AugmentSpec {
    int max_translate_px = 30;
    double hflip_p = 0.5;
    bool rot90 = false;          // quarter-turn rotations (dermoscopy profile)
    double max_brightness = 0.0; // fractional change; multi-channel only
    double max_contrast = 0.0;
    double max_hue = 0.0;
    double max_saturation = 0.0;
    bool style_channel = false;  // append a restyled copy as an extra channel

    static AugmentSpec ultrasound() {
        AugmentSpec s;
        s.max_translate_px = 30;
        s.hflip_p = 0.5;
        return s;
    }
    static AugmentSpec dermoscopy() {
        AugmentSpec s;
        s.max_translate_px = 30;
        s.hflip_p = 0.5;
        s.rot90 = true;
        s.max_brightness = 0.20;
        s.max_contrast = 0.50;
        s.max_hue = 0.05;
        s.max_saturation = 0.50;
        return s;
    }
    static AugmentSpec none() {
        AugmentSpec s;
        s.max_translate_px = 0;
        s.hflip_p = 0.0;
        return s;
    }
};

namespace detail {

inline Image translate(const Image& img, int dx, int dy) {
    Image out(img.height, img.width, img.channels);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                const int sy = y - dy, sx = x - dx;
                if (sy >= 0 && sy < img.height && sx >= 0 && sx < img.width)
                    out.at(y, x, c) = img.at(sy, sx, c);
            }
    return out;
}

inline Image hflip(const Image& img) {
    Image out(img.height, img.width, img.channels);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    return out;
}

// k quarter turns counter-clockwise; square images only.
inline Image rot90k(const Image& img, int k) {
    k = ((k % 4) + 4) % 4;
    if (k == 0) return img;
    Image out(img.height, img.width, img.channels);
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                int sy = y, sx = x;
                if (k == 1) { sy = x; sx = img.width - 1 - y; }
                else if (k == 2) { sy = img.height - 1 - y; sx = img.width - 1 - x; }
                else { sy = img.height - 1 - x; sx = y; }
                out.at(y, x, c) = img.at(sy, sx, c);
            }
    return out;
}

inline void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
    const float mx = std::max({r, g, b}), mn = std::min({r, g, b});
    v = mx;
    const float d = mx - mn;
    s = mx > 0 ? d / mx : 0.0f;
    if (d <= 0) { h = 0; return; }
    if (mx == r) h = std::fmod((g - b) / d, 6.0f);
    else if (mx == g) h = (b - r) / d + 2.0f;
    else h = (r - g) / d + 4.0f;
    h /= 6.0f;
    if (h < 0) h += 1.0f;
}

inline void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
    h = std::fmod(h, 1.0f);
    if (h < 0) h += 1.0f;
    const float c = v * s;
    const float hp = h * 6.0f;
    const float x = c * (1.0f - std::fabs(std::fmod(hp, 2.0f) - 1.0f));
    float rr = 0, gg = 0, bb = 0;
    if (hp < 1) { rr = c; gg = x; }
    else if (hp < 2) { rr = x; gg = c; }
    else if (hp < 3) { gg = c; bb = x; }
    else if (hp < 4) { gg = x; bb = c; }
    else if (hp < 5) { rr = x; bb = c; }
    else { rr = c; bb = x; }
    const float m = v - c;
    r = rr + m; g = gg + m; b = bb + m;
}

// Fixed 12-entry style bank: hue rotation + saturation/value gains. A cheap
// photometric stand-in for per-style image variants.
inline std::array<std::array<float, 3>, 12> style_bank() {
    return {{{0.00f, 1.0f, 1.0f}, {0.08f, 1.1f, 0.9f}, {0.17f, 0.8f, 1.1f},
             {0.25f, 1.2f, 1.0f}, {0.33f, 0.9f, 0.8f}, {0.42f, 1.0f, 1.2f},
             {0.50f, 1.1f, 1.1f}, {0.58f, 0.7f, 0.9f}, {0.67f, 1.2f, 0.8f},
             {0.75f, 0.9f, 1.0f}, {0.83f, 1.0f, 0.9f}, {0.92f, 1.1f, 1.0f}}};
}

}  // namespace detail

struct AugmentResult {
    Image image;
    std::optional<MaskImage> mask;
};

// One identical geometric transform for image and mask; photometric changes
// touch the image only (and only multi-channel images). The mask is
// re-binarized after the geometric ops.
inline AugmentResult augment(const Image& image, const std::optional<MaskImage>& mask,
                             const AugmentSpec& spec, Rng& rng) {
    if (mask && !(mask->height == image.height && mask->width == image.width))
        throw std::invalid_argument("augment: image/mask misaligned");
    Image img = image;
    std::optional<MaskImage> m = mask;

    const int t = spec.max_translate_px;
    const int dx = t > 0 ? uniform_int(rng, -t, t) : 0;
    const int dy = t > 0 ? uniform_int(rng, -t, t) : 0;
    const bool flip = spec.hflip_p > 0.0 && uniform(rng, 0.0, 1.0) < spec.hflip_p;
    const int rot = spec.rot90 ? uniform_int(rng, 0, 3) : 0;

    if (dx != 0 || dy != 0) {
        img = detail::translate(img, dx, dy);
        if (m) *m = detail::translate(*m, dx, dy);
    }
    if (flip) {
        img = detail::hflip(img);
        if (m) *m = detail::hflip(*m);
    }
    if (rot != 0) {
        img = detail::rot90k(img, rot);
        if (m) *m = detail::rot90k(*m, rot);
    }
    if (m) *m = binarize(*m);

    if (img.channels >= 3) {
        const double br = spec.max_brightness > 0 ? uniform(rng, -spec.max_brightness, spec.max_brightness) : 0.0;
        const double ct = spec.max_contrast > 0 ? uniform(rng, -spec.max_contrast, spec.max_contrast) : 0.0;
        const double hu = spec.max_hue > 0 ? uniform(rng, -spec.max_hue, spec.max_hue) : 0.0;
        const double sa = spec.max_saturation > 0 ? uniform(rng, -spec.max_saturation, spec.max_saturation) : 0.0;
        if (br != 0.0 || ct != 0.0) {
            const double mean = img.mean();
            for (float& v : img.data) {
                double x = v * (1.0 + br);
                x = mean + (x - mean) * (1.0 + ct);
                v = static_cast<float>(std::clamp(x, 0.0, 1.0));
            }
        }
        if (hu != 0.0 || sa != 0.0) {
            const size_t n = img.plane_size();
            for (size_t i = 0; i < n; ++i) {
                float h, s, v;
                detail::rgb_to_hsv(img.data[i], img.data[n + i], img.data[2 * n + i], h, s, v);
                h += static_cast<float>(hu);
                s = std::clamp(s * (1.0f + static_cast<float>(sa)), 0.0f, 1.0f);
                detail::hsv_to_rgb(h, s, v, img.data[i], img.data[n + i], img.data[2 * n + i]);
            }
        }
    }

    if (spec.style_channel && img.channels >= 3) {
        const auto bank = detail::style_bank();
        const auto& st = bank[uniform_int(rng, 0, 11)];
        const size_t n = img.plane_size();
        Image with_style(img.height, img.width, img.channels + 1);
        std::copy(img.data.begin(), img.data.end(), with_style.data.begin());
        for (size_t i = 0; i < n; ++i) {
            float h, s, v;
            detail::rgb_to_hsv(img.data[i], img.data[n + i], img.data[2 * n + i], h, s, v);
            float r, g, b;
            detail::hsv_to_rgb(h + st[0], std::clamp(s * st[1], 0.0f, 1.0f),
                               std::clamp(v * st[2], 0.0f, 1.0f), r, g, b);
            with_style.data[3 * n + i] = (r + g + b) / 3.0f;
        }
        img = std::move(with_style);
    }
    return {std::move(img), std::move(m)};
}

}  // namespace tricycle
