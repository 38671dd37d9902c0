#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "tricycle/image.hpp"

namespace tricycle {

// Randomized elliptical ROI template. Offsets are relative to the image
// center; angle in [0, 2*pi); axes in pixels.
//
// Sampling ranges for image side L:
//   |center_dx|, |center_dy| <= L/8
//   semi_major in [L/8, L/4]   (major-axis length between L/4 and L/2)
//   semi_minor in [0.5, 0.9] * semi_major
struct EllipseSpec {
    double center_dx = 0.0;
    double center_dy = 0.0;
    double angle = 0.0;
    double semi_major = 0.0;
    double semi_minor = 0.0;
};

// Ultrasound imaging cone: a wedge from an apex above the image down to a
// partial-ellipse bottom arc. The side boundaries are straight lines from the
// arc endpoints to the apex, so the cone is cut off at the top of the image.
struct ConeSpec {
    double apex_x = 0.0;
    double apex_y = 0.0;  // < 0: strictly above the image
    // Axis-aligned bottom ellipse.
    double center_x = 0.0;
    double center_y = 0.0;
    double semi_x = 0.0;
    double semi_y = 0.0;
    // Arc endpoints; the side lines connect these to the apex.
    double end_lx = 0.0, end_ly = 0.0;
    double end_rx = 0.0, end_ry = 0.0;
};

constexpr int kMinTemplateSize = 32;

inline void require_template_size(int size) {
    if (size < kMinTemplateSize)
        throw std::invalid_argument("shape_prior: size must be >= 32");
}

inline EllipseSpec sample_ellipse_spec(Rng& rng, int size) {
    require_template_size(size);
    const double L = size;
    EllipseSpec s;
    s.center_dx = uniform(rng, -L / 8.0, L / 8.0);
    s.center_dy = uniform(rng, -L / 8.0, L / 8.0);
    s.angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    s.semi_major = uniform(rng, L / 8.0, L / 4.0);
    s.semi_minor = s.semi_major * uniform(rng, 0.5, 0.9);
    return s;
}

// Center-of-pixel inclusion test against the analytic ellipse inequality.
// No anti-aliasing: masks stay strictly binary.
inline MaskImage rasterize_ellipse(const EllipseSpec& s, int size) {
    require_template_size(size);
    MaskImage mask(size, size, 1);
    const double cx = size / 2.0 + s.center_dx;
    const double cy = size / 2.0 + s.center_dy;
    const double ca = std::cos(s.angle), sa = std::sin(s.angle);
    const double inv_a2 = 1.0 / (s.semi_major * s.semi_major);
    const double inv_b2 = 1.0 / (s.semi_minor * s.semi_minor);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double px = (x + 0.5) - cx;
            const double py = (y + 0.5) - cy;
            const double u = px * ca + py * sa;
            const double v = -px * sa + py * ca;
            if (u * u * inv_a2 + v * v * inv_b2 <= 1.0)
                mask.at(y, x) = 1.0f;
        }
    }
    return mask;
}

inline std::pair<EllipseSpec, MaskImage> sample_ellipse_mask(Rng& rng, int size) {
    EllipseSpec spec = sample_ellipse_spec(rng, size);
    return {spec, rasterize_ellipse(spec, size)};
}

inline ConeSpec sample_cone_spec(Rng& rng, int size) {
    require_template_size(size);
    const double L = size;
    ConeSpec c;
    c.apex_x = L / 2.0 + uniform(rng, -L / 8.0, L / 8.0);
    c.apex_y = -uniform(rng, 0.10 * L, 0.45 * L);
    c.center_x = L / 2.0 + uniform(rng, -L / 12.0, L / 12.0);
    c.center_y = uniform(rng, 0.70 * L, 0.92 * L);
    c.semi_x = uniform(rng, 0.32 * L, 0.48 * L);
    c.semi_y = uniform(rng, 0.12 * L, 0.30 * L);
    // Endpoints sit at, or slightly above, the horizontal extremes of the
    // bottom ellipse; the arc between them (through the lowest point) is the
    // visible bottom boundary.
    const double tl = std::numbers::pi + uniform(rng, 0.0, 0.35);
    const double tr = -uniform(rng, 0.0, 0.35);
    c.end_lx = c.center_x + c.semi_x * std::cos(tl);
    c.end_ly = c.center_y + c.semi_y * std::sin(tl);
    c.end_rx = c.center_x + c.semi_x * std::cos(tr);
    c.end_ry = c.center_y + c.semi_y * std::sin(tr);
    return c;
}

namespace detail {
inline double cross2(double ax, double ay, double bx, double by) {
    return ax * by - ay * bx;
}
}  // namespace detail

// Point-in-cone test: inside the wedge spanned by the two side lines, and
// either above the chord between the arc endpoints or inside the bottom
// ellipse (the bulge below the chord).
inline bool cone_contains(const ConeSpec& c, double x, double y) {
    using detail::cross2;
    // Wedge: same side of each apex->endpoint line as the ellipse center.
    const double sl = cross2(c.end_lx - c.apex_x, c.end_ly - c.apex_y,
                             x - c.apex_x, y - c.apex_y);
    const double rl = cross2(c.end_lx - c.apex_x, c.end_ly - c.apex_y,
                             c.center_x - c.apex_x, c.center_y - c.apex_y);
    if (sl * rl < 0.0) return false;
    const double sr = cross2(c.end_rx - c.apex_x, c.end_ry - c.apex_y,
                             x - c.apex_x, y - c.apex_y);
    const double rr = cross2(c.end_rx - c.apex_x, c.end_ry - c.apex_y,
                             c.center_x - c.apex_x, c.center_y - c.apex_y);
    if (sr * rr < 0.0) return false;
    // Above the chord (apex side) or inside the bottom ellipse.
    const double sc = cross2(c.end_rx - c.end_lx, c.end_ry - c.end_ly,
                             x - c.end_lx, y - c.end_ly);
    const double rc = cross2(c.end_rx - c.end_lx, c.end_ry - c.end_ly,
                             c.apex_x - c.end_lx, c.apex_y - c.end_ly);
    if (sc * rc >= 0.0) return true;
    const double ex = (x - c.center_x) / c.semi_x;
    const double ey = (y - c.center_y) / c.semi_y;
    return ex * ex + ey * ey <= 1.0;
}

inline MaskImage rasterize_cone(const ConeSpec& c, int size) {
    MaskImage mask(size, size, 1);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (cone_contains(c, x + 0.5, y + 0.5))
                mask.at(y, x) = 1.0f;
    return mask;
}

inline std::pair<ConeSpec, MaskImage> sample_ultrasound_cone(Rng& rng, int size) {
    ConeSpec spec = sample_cone_spec(rng, size);
    return {spec, rasterize_cone(spec, size)};
}

// ROI pixels outside the cone are removed (pixelwise AND).
inline MaskImage compose_kidney_template(const MaskImage& ellipse_mask,
                                         const MaskImage& cone_mask) {
    require_same_shape(ellipse_mask, cone_mask, "compose_kidney_template");
    return mask_and(ellipse_mask, cone_mask);
}

struct TemplateSample {
    EllipseSpec ellipse;
    std::optional<ConeSpec> cone;
    MaskImage mask;
};

constexpr int kTemplateResampleCap = 100;
constexpr double kMinForegroundFraction = 0.02;

// Draws templates until the (optionally cone-clipped) ROI keeps at least 2%
// of the image area as foreground; a cone that misses the ellipse entirely is
// rejected and resampled, capped at 100 attempts.
inline TemplateSample sample_template(Rng& rng, int size, bool with_cone) {
    require_template_size(size);
    const auto min_fg =
        static_cast<long long>(kMinForegroundFraction * size * size);
    for (int attempt = 0; attempt < kTemplateResampleCap; ++attempt) {
        auto [espec, emask] = sample_ellipse_mask(rng, size);
        if (!with_cone) {
            if (emask.foreground_count() >= min_fg)
                return {espec, std::nullopt, std::move(emask)};
            continue;
        }
        auto [cspec, cmask] = sample_ultrasound_cone(rng, size);
        MaskImage composed = compose_kidney_template(emask, cmask);
        if (composed.foreground_count() >= min_fg)
            return {espec, cspec, std::move(composed)};
    }
    throw std::runtime_error(
        "sample_template: no non-degenerate template within 100 attempts");
}

}  // namespace tricycle
