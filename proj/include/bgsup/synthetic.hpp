#pragma once

// Synthetic test video: a static textured background with a dark square
// (the "shadow") sliding across it, plus optional Gaussian noise. Frames are
// quantized to 8-bit levels so they survive a PGM round trip unchanged.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"
#include "bgsup/metrics.hpp"

namespace bgsup {

struct MovingBlockParams {
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t frames = 40;
    std::size_t block = 8;
    double block_level = 0.05;
    double noise_sigma = 0.005;
    std::uint64_t seed = 1;
};

struct SyntheticVideo {
    FrameStack frames;
    std::vector<std::vector<std::uint32_t>> levels;  // 8-bit samples per frame
    std::vector<GroundTruth> truth;                  // block position per frame
};

/// Background in [0.25, 0.85]: two low-frequency waves plus static speckle.
inline std::vector<double> textured_background(std::size_t height, std::size_t width,
                                               std::mt19937_64& rng) {
    std::uniform_real_distribution<double> speckle(-0.04, 0.04);
    std::vector<double> bg(height * width);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double wave = 0.15 * std::sin(two_pi * static_cast<double>(c) / 23.0) *
                                    std::cos(two_pi * static_cast<double>(r) / 31.0) +
                                0.1 * std::sin(two_pi * static_cast<double>(r + 2 * c) / 47.0);
            bg[r * width + c] = std::clamp(0.55 + wave + speckle(rng), 0.25, 0.85);
        }
    }
    return bg;
}

inline SyntheticVideo make_moving_block_video(const MovingBlockParams& p = {}) {
    if (p.frames < 2) throw InputError("synthetic video needs at least 2 frames");
    if (p.block == 0 || p.block + 2 > p.height || p.block + 2 > p.width) {
        throw InputError("block does not fit inside the frame");
    }
    std::mt19937_64 rng(p.seed);
    const std::vector<double> bg = textured_background(p.height, p.width, rng);
    std::normal_distribution<double> noise(0.0, 1.0);

    SyntheticVideo out;
    std::vector<Frame> frames;
    const double span_x = static_cast<double>(p.width - p.block - 2);
    const double span_y = static_cast<double>(p.height - p.block - 2);
    for (std::size_t k = 0; k < p.frames; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(p.frames - 1);
        // Left to right, with a gentle vertical drift.
        const auto bx = static_cast<std::int64_t>(std::lround(1.0 + t * span_x));
        const auto by = static_cast<std::int64_t>(
            std::lround(1.0 + span_y * (0.5 + 0.35 * std::sin(std::numbers::pi * t))));
        const BoundingBox box{bx, by, static_cast<std::int64_t>(p.block),
                              static_cast<std::int64_t>(p.block)};
        out.truth.push_back({k, box});

        std::vector<std::uint32_t> lv(p.height * p.width);
        Frame f(p.height, p.width);
        for (std::size_t r = 0; r < p.height; ++r) {
            for (std::size_t c = 0; c < p.width; ++c) {
                const bool inside = static_cast<std::int64_t>(c) >= bx &&
                                    static_cast<std::int64_t>(c) < bx + box.w &&
                                    static_cast<std::int64_t>(r) >= by &&
                                    static_cast<std::int64_t>(r) < by + box.h;
                double v = inside ? p.block_level : bg[r * p.width + c];
                if (p.noise_sigma > 0.0) v += p.noise_sigma * noise(rng);
                const auto level = static_cast<std::uint32_t>(
                    std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
                lv[r * p.width + c] = level;
                f.at(r, c) = static_cast<double>(level) / 255.0;
            }
        }
        out.levels.push_back(std::move(lv));
        frames.push_back(std::move(f));
    }
    out.frames = FrameStack(std::move(frames));
    return out;
}

}  // namespace bgsup
