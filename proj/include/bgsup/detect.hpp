#pragma once

// Threshold-and-label shadow detector on the sparse foreground X.
// Shadows are darker than the background, so they show up as negative
// foreground values; bright scatterers (positive X) are ignored.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"
#include "bgsup/metrics.hpp"
#include "bgsup/solver.hpp"

namespace bgsup {

struct Mask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> bits;  // row-major, 0 or 1

    Mask() = default;
    Mask(std::size_t h, std::size_t w) : height(h), width(w), bits(h * w, 0) {}

    bool test(std::size_t row, std::size_t col) const { return bits[row * width + col] != 0; }
    void set(std::size_t row, std::size_t col) { bits[row * width + col] = 1; }
    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }
};

/// Pixels at or below -tau.
inline Mask threshold_foreground(const Frame& x_frame, double tau) {
    if (!(tau > 0.0)) throw InputError("threshold_foreground: tau must be positive");
    Mask m(x_frame.height, x_frame.width);
    for (std::size_t i = 0; i < x_frame.pixels.size(); ++i) {
        if (x_frame.pixels[i] <= -tau) m.bits[i] = 1;
    }
    return m;
}

struct Component {
    BoundingBox box;
    std::size_t area = 0;
    std::vector<std::size_t> pixels;  // raster indices, in discovery order
};

/// Connected regions of the mask with at least min_area pixels, ordered by
/// the raster position of each region's first pixel.
inline std::vector<Component> connected_components(const Mask& mask, std::size_t min_area,
                                                   int connectivity) {
    if (connectivity != 4 && connectivity != 8) {
        throw InputError("connectivity must be 4 or 8");
    }
    const auto h = static_cast<std::int64_t>(mask.height);
    const auto w = static_cast<std::int64_t>(mask.width);
    std::vector<std::uint8_t> seen(mask.bits.size(), 0);
    std::vector<Component> out;
    std::vector<std::size_t> queue;

    for (std::int64_t r0 = 0; r0 < h; ++r0) {
        for (std::int64_t c0 = 0; c0 < w; ++c0) {
            const auto start = static_cast<std::size_t>(r0 * w + c0);
            if (!mask.bits[start] || seen[start]) continue;

            Component comp;
            std::int64_t rmin = r0, rmax = r0, cmin = c0, cmax = c0;
            queue.clear();
            queue.push_back(start);
            seen[start] = 1;
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const std::size_t idx = queue[head];
                const auto r = static_cast<std::int64_t>(idx) / w;
                const auto c = static_cast<std::int64_t>(idx) % w;
                comp.pixels.push_back(idx);
                rmin = std::min(rmin, r);
                rmax = std::max(rmax, r);
                cmin = std::min(cmin, c);
                cmax = std::max(cmax, c);
                for (std::int64_t dr = -1; dr <= 1; ++dr) {
                    for (std::int64_t dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        if (connectivity == 4 && dr != 0 && dc != 0) continue;
                        const std::int64_t rr = r + dr;
                        const std::int64_t cc = c + dc;
                        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                        const auto nidx = static_cast<std::size_t>(rr * w + cc);
                        if (mask.bits[nidx] && !seen[nidx]) {
                            seen[nidx] = 1;
                            queue.push_back(nidx);
                        }
                    }
                }
            }
            comp.area = comp.pixels.size();
            if (comp.area < min_area) continue;
            comp.box = {cmin, rmin, cmax - cmin + 1, rmax - rmin + 1};
            out.push_back(std::move(comp));
        }
    }
    return out;
}

struct DetectorConfig {
    std::optional<double> tau;  // default: per-frame adaptive_tau()
    std::size_t min_area = 9;
    int connectivity = 8;
};

inline constexpr double kMinimumTau = 0.05;

/// 3 x median of the nonzero |X| values in the frame, floored at 0.05.
inline double adaptive_tau(const Frame& x_frame) {
    std::vector<double> mags;
    for (double v : x_frame.pixels) {
        if (v != 0.0) mags.push_back(std::abs(v));
    }
    if (mags.empty()) return kMinimumTau;
    const std::size_t mid = mags.size() / 2;
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid), mags.end());
    double median = mags[mid];
    if (mags.size() % 2 == 0) {
        const double lower = *std::max_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    return std::max(kMinimumTau, 3.0 * median);
}

/// Detections in one foreground frame. Score is the mean |X| over the
/// component divided by 2 tau, capped at 1. Every member pixel already has
/// |X| >= tau, so scores fall in [0.5, 1].
inline std::vector<Detection> detect_frame(const Frame& x_frame, std::size_t frame_index,
                                           const DetectorConfig& cfg = {}) {
    const double tau = cfg.tau ? *cfg.tau : adaptive_tau(x_frame);
    const Mask mask = threshold_foreground(x_frame, tau);
    std::vector<Detection> out;
    for (const Component& comp : connected_components(mask, cfg.min_area, cfg.connectivity)) {
        double sum = 0.0;
        for (std::size_t idx : comp.pixels) sum += std::abs(x_frame.pixels[idx]);
        const double mean = sum / static_cast<double>(comp.area);
        out.push_back({frame_index, comp.box, std::min(1.0, mean / (2.0 * tau))});
    }
    return out;
}

/// Runs detect_frame on every column of the foreground matrix.
inline std::vector<Detection> detect_shadows(const Matrix& foreground, std::size_t height,
                                             std::size_t width, const DetectorConfig& cfg = {}) {
    if (cfg.tau && !(*cfg.tau > 0.0)) throw InputError("tau must be positive");
    if (height == 0 || width == 0 || static_cast<std::size_t>(foreground.rows()) != height * width) {
        throw InputError("detect: foreground has " + std::to_string(foreground.rows()) +
                         " rows, frames are " + std::to_string(height) + "x" +
                         std::to_string(width));
    }
    std::vector<Detection> out;
    for (Eigen::Index j = 0; j < foreground.cols(); ++j) {
        auto dets = detect_frame(column_frame(foreground, j, height, width),
                                 static_cast<std::size_t>(j), cfg);
        out.insert(out.end(), dets.begin(), dets.end());
    }
    return out;
}

inline std::vector<Detection> detect_shadows(const DecompositionResult& result,
                                             std::size_t height, std::size_t width,
                                             const DetectorConfig& cfg = {}) {
    return detect_shadows(result.foreground, height, width, cfg);
}

}  // namespace bgsup
