#pragma once

#include <array>
#include <cmath>

#include "tricycle/image.hpp"

namespace tricycle {

// Contrast Limited Adaptive Histogram Equalization over a tile grid.
//
// The clip limit is a fraction of the tile pixel count (0.03 clips each of
// the 256 histogram bins at 3% of the tile area); clipped mass is
// redistributed uniformly. Pixel mappings are bilinearly interpolated
// between the four surrounding tile CDFs. Input and output are single
// channel in [0,1].
inline Image clahe(const Image& gray, double clip_limit = 0.03, int grid = 8) {
    if (gray.channels != 1)
        throw std::invalid_argument("clahe: expects a single-channel image");
    if (grid < 1 || clip_limit <= 0.0)
        throw std::invalid_argument("clahe: bad parameters");
    constexpr int kBins = 256;
    const int H = gray.height, W = gray.width;
    const int gy = std::min(grid, H), gx = std::min(grid, W);

    auto tile_lo = [](int idx, int n, int g) { return idx * n / g; };
    // Per-tile clipped CDFs.
    std::vector<std::array<float, kBins>> cdf(static_cast<size_t>(gy) * gx);
    for (int ty = 0; ty < gy; ++ty) {
        for (int tx = 0; tx < gx; ++tx) {
            const int y0 = tile_lo(ty, H, gy), y1 = tile_lo(ty + 1, H, gy);
            const int x0 = tile_lo(tx, W, gx), x1 = tile_lo(tx + 1, W, gx);
            const long long area = static_cast<long long>(y1 - y0) * (x1 - x0);
            std::array<double, kBins> hist{};
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) {
                    int b = static_cast<int>(gray.at(y, x) * (kBins - 1) + 0.5f);
                    ++hist[std::clamp(b, 0, kBins - 1)];
                }
            const double limit = std::max(1.0, clip_limit * static_cast<double>(area));
            double excess = 0.0;
            for (auto& h : hist) {
                if (h > limit) {
                    excess += h - limit;
                    h = limit;
                }
            }
            const double bonus = excess / kBins;
            double acc = 0.0;
            auto& c = cdf[ty * gx + tx];
            for (int b = 0; b < kBins; ++b) {
                acc += hist[b] + bonus;
                c[b] = static_cast<float>(acc / static_cast<double>(area));
            }
        }
    }

    // Tile centers for interpolation weights.
    auto center = [&](int idx, int n, int g) {
        return 0.5 * (tile_lo(idx, n, g) + tile_lo(idx + 1, n, g));
    };
    Image out(H, W, 1);
    for (int y = 0; y < H; ++y) {
        // Bracketing tile rows.
        int ty0 = 0;
        while (ty0 + 1 < gy && center(ty0 + 1, H, gy) <= y + 0.5) ++ty0;
        int ty1 = std::min(ty0 + 1, gy - 1);
        if (y + 0.5 < center(ty0, H, gy)) ty1 = ty0;
        const double cy0 = center(ty0, H, gy), cy1 = center(ty1, H, gy);
        const double wy = (cy1 > cy0) ? std::clamp((y + 0.5 - cy0) / (cy1 - cy0), 0.0, 1.0) : 0.0;
        for (int x = 0; x < W; ++x) {
            int tx0 = 0;
            while (tx0 + 1 < gx && center(tx0 + 1, W, gx) <= x + 0.5) ++tx0;
            int tx1 = std::min(tx0 + 1, gx - 1);
            if (x + 0.5 < center(tx0, W, gx)) tx1 = tx0;
            const double cx0 = center(tx0, W, gx), cx1 = center(tx1, W, gx);
            const double wx = (cx1 > cx0) ? std::clamp((x + 0.5 - cx0) / (cx1 - cx0), 0.0, 1.0) : 0.0;
            const int b = std::clamp(
                static_cast<int>(gray.at(y, x) * 255.0f + 0.5f), 0, kBins - 1);
            const double v00 = cdf[ty0 * gx + tx0][b], v01 = cdf[ty0 * gx + tx1][b];
            const double v10 = cdf[ty1 * gx + tx0][b], v11 = cdf[ty1 * gx + tx1][b];
            const double v = (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                             wy * ((1 - wx) * v10 + wx * v11);
            out.at(y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return out;
}

}  // namespace tricycle
