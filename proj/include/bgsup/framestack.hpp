#pragma once

// Frames, frame stacks, and the column-stacked matrix view of a video.
//
// A stack of n frames of size height x width maps to an m x n matrix with
// m = height * width. Column j holds frame j in row-major raster order
// (row index varies slowest), so pixel (r, c) of frame j sits at
// D(r * width + c, j).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bgsup/error.hpp"

namespace bgsup {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Frame {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> pixels;  // row-major

    Frame() = default;
    Frame(std::size_t h, std::size_t w) : height(h), width(w), pixels(h * w, 0.0) {}
    Frame(std::size_t h, std::size_t w, std::vector<double> px)
        : height(h), width(w), pixels(std::move(px)) {
        if (pixels.size() != height * width) {
            throw InputError("frame pixel count " + std::to_string(pixels.size()) +
                             " does not match " + std::to_string(height) + "x" +
                             std::to_string(width));
        }
    }

    std::size_t size() const { return pixels.size(); }
    double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }

    bool operator==(const Frame&) const = default;
};

/// Temporally ordered frames sharing one size. Holds at least two frames.
class FrameStack {
public:
    FrameStack() = default;

    explicit FrameStack(std::vector<Frame> frames) : frames_(std::move(frames)) {
        if (frames_.size() < 2) {
            throw InputError("frame stack needs at least 2 frames, got " +
                             std::to_string(frames_.size()));
        }
        height_ = frames_.front().height;
        width_ = frames_.front().width;
        if (height_ == 0 || width_ == 0) throw InputError("frames must be non-empty");
        for (std::size_t j = 0; j < frames_.size(); ++j) {
            const Frame& f = frames_[j];
            if (f.height != height_ || f.width != width_) {
                throw InputError("frame " + std::to_string(j) + " is " +
                                 std::to_string(f.height) + "x" + std::to_string(f.width) +
                                 ", expected " + std::to_string(height_) + "x" +
                                 std::to_string(width_));
            }
            if (f.pixels.size() != height_ * width_) {
                throw InputError("frame " + std::to_string(j) + " has wrong pixel count");
            }
        }
    }

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t pixels_per_frame() const { return height_ * width_; }
    std::size_t size() const { return frames_.size(); }

    const Frame& operator[](std::size_t j) const { return frames_[j]; }
    const std::vector<Frame>& frames() const { return frames_; }

    auto begin() const { return frames_.begin(); }
    auto end() const { return frames_.end(); }

    bool operator==(const FrameStack&) const = default;

private:
    std::vector<Frame> frames_;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
};

/// Maps integer samples of the given bit depth (8 or 16) onto [0, 1].
inline Frame normalize(std::span<const std::uint32_t> raw, int bit_depth, std::size_t height,
                       std::size_t width) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw InputError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
    }
    if (raw.size() != height * width) {
        throw InputError("raw frame has " + std::to_string(raw.size()) + " samples, expected " +
                         std::to_string(height * width));
    }
    const std::uint32_t full_scale = (1u << bit_depth) - 1u;
    const double inv = 1.0 / static_cast<double>(full_scale);
    Frame out(height, width);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] > full_scale) {
            throw InputError("sample " + std::to_string(raw[i]) + " at index " +
                             std::to_string(i) + " exceeds " + std::to_string(bit_depth) +
                             "-bit range");
        }
        out.pixels[i] = static_cast<double>(raw[i]) * inv;
    }
    return out;
}

/// Column j of the result is frame j in raster order.
inline Matrix stack(const FrameStack& fs) {
    const auto m = static_cast<Eigen::Index>(fs.pixels_per_frame());
    const auto n = static_cast<Eigen::Index>(fs.size());
    Matrix d(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& px = fs[static_cast<std::size_t>(j)].pixels;
        d.col(j) = Eigen::Map<const Vector>(px.data(), m);
    }
    return d;
}

/// One column as a frame. Values are copied unclipped (foreground is signed).
inline Frame column_frame(const Matrix& m, Eigen::Index col, std::size_t height,
                          std::size_t width) {
    if (static_cast<std::size_t>(m.rows()) != height * width) {
        throw InputError("matrix has " + std::to_string(m.rows()) + " rows, expected " +
                         std::to_string(height) + "*" + std::to_string(width));
    }
    if (col < 0 || col >= m.cols()) throw InputError("column index out of range");
    Frame f(height, width);
    Eigen::Map<Vector>(f.pixels.data(), m.rows()) = m.col(col);
    return f;
}

/// Inverse of stack().
inline FrameStack unstack(const Matrix& m, std::size_t height, std::size_t width) {
    if (height == 0 || width == 0 || static_cast<std::size_t>(m.rows()) != height * width) {
        throw InputError("cannot unstack " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + " matrix into " + std::to_string(height) +
                         "x" + std::to_string(width) + " frames");
    }
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) frames.push_back(column_frame(m, j, height, width));
    return FrameStack(std::move(frames));
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace bgsup
