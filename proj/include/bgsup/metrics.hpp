#pragma once

// Image-quality and detection-scoring metrics.
//
// Image metrics work on 8-bit levels: level = floor(clamp(v, 0, 1) * 255 + 0.5).
// Detection scoring follows PASCAL VOC: greedy matching in descending score
// order at an IoU threshold, then all-points interpolated average precision.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"

namespace bgsup {

struct BoundingBox {
    std::int64_t x = 0;  // left column
    std::int64_t y = 0;  // top row
    std::int64_t w = 1;
    std::int64_t h = 1;

    std::int64_t area() const { return w * h; }
    bool operator==(const BoundingBox&) const = default;
};

struct Detection {
    std::size_t frame_index = 0;
    BoundingBox box;
    double score = 0.0;

    bool operator==(const Detection&) const = default;
};

struct GroundTruth {
    std::size_t frame_index = 0;
    BoundingBox box;

    bool operator==(const GroundTruth&) const = default;
};

inline bool box_within(const BoundingBox& b, std::size_t height, std::size_t width) {
    return b.w >= 1 && b.h >= 1 && b.x >= 0 && b.y >= 0 &&
           static_cast<std::size_t>(b.x + b.w) <= width &&
           static_cast<std::size_t>(b.y + b.h) <= height;
}

// ---------------------------------------------------------------------------
// Image metrics

inline int quantize_level(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<int>(std::floor(c * 255.0 + 0.5));
}

/// Shannon entropy (bits) of the 256-bin gray-level histogram.
inline double information_entropy(const Frame& frame) {
    if (frame.pixels.empty()) return 0.0;
    std::array<std::size_t, 256> hist{};
    for (double v : frame.pixels) ++hist[static_cast<std::size_t>(quantize_level(v))];
    const double total = static_cast<double>(frame.pixels.size());
    double h = 0.0;
    for (std::size_t count : hist) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / total;
        h -= p * std::log2(p);
    }
    // -0.0 for a single bin
    return h == 0.0 ? 0.0 : h;
}

/// Mean squared level difference over horizontally and vertically adjacent
/// pixel pairs with both ends inside roi.
inline double shadow_contrast(const Frame& frame, const BoundingBox& roi) {
    if (!box_within(roi, frame.height, frame.width)) {
        throw InputError("contrast ROI lies outside the frame");
    }
    if (roi.area() < 2) throw InputError("contrast ROI needs at least 2 pixels");

    auto level = [&](std::int64_t r, std::int64_t c) {
        return static_cast<std::int64_t>(
            quantize_level(frame.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c))));
    };
    std::int64_t sum = 0;
    std::int64_t pairs = 0;
    for (std::int64_t r = roi.y; r < roi.y + roi.h; ++r) {
        for (std::int64_t c = roi.x; c < roi.x + roi.w; ++c) {
            const std::int64_t here = level(r, c);
            if (c + 1 < roi.x + roi.w) {
                const std::int64_t d = here - level(r, c + 1);
                sum += d * d;
                ++pairs;
            }
            if (r + 1 < roi.y + roi.h) {
                const std::int64_t d = here - level(r + 1, c);
                sum += d * d;
                ++pairs;
            }
        }
    }
    return static_cast<double>(sum) / static_cast<double>(pairs);
}

/// Linear min-max stretch onto [0, 1]; a constant frame maps to zeros.
inline Frame stretch_to_unit(const Frame& frame) {
    Frame out(frame.height, frame.width);
    if (frame.pixels.empty()) return out;
    const auto [lo, hi] = std::minmax_element(frame.pixels.begin(), frame.pixels.end());
    const double span = *hi - *lo;
    if (span <= 0.0) return out;
    for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
        out.pixels[i] = (frame.pixels[i] - *lo) / span;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Detection scoring

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const std::int64_t ix = std::max<std::int64_t>(
        0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const std::int64_t iy = std::max<std::int64_t>(
        0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const std::int64_t inter = ix * iy;
    const std::int64_t uni = a.area() + b.area() - inter;
    if (uni <= 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Descending score; ties by frame, then top-left anchor in raster order.
inline bool ranks_before(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame_index != b.frame_index) return a.frame_index < b.frame_index;
    if (a.box.y != b.box.y) return a.box.y < b.box.y;
    return a.box.x < b.box.x;
}

inline std::vector<std::size_t> score_order(const std::vector<Detection>& dets) {
    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranks_before(dets[a], dets[b]);
    });
    return order;
}

struct MatchResult {
    std::vector<std::size_t> order;   // detection indices, best score first
    std::vector<bool> true_positive;  // indexed by detection
    std::vector<long> matched_gt;     // indexed by detection, -1 when FP
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

/// Each detection, best score first, claims the unmatched same-frame ground
/// truth of highest IoU (lowest index on ties) if that IoU reaches iou_min.
inline MatchResult match_detections(const std::vector<Detection>& dets,
                                    const std::vector<GroundTruth>& gts, double iou_min) {
    if (!(iou_min > 0.0 && iou_min <= 1.0)) {
        throw InputError("IoU threshold must lie in (0, 1]");
    }
    MatchResult m;
    m.order = score_order(dets);
    m.true_positive.assign(dets.size(), false);
    m.matched_gt.assign(dets.size(), -1);
    std::vector<bool> taken(gts.size(), false);

    for (std::size_t d : m.order) {
        long best = -1;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (taken[g] || gts[g].frame_index != dets[d].frame_index) continue;
            const double o = iou(dets[d].box, gts[g].box);
            if (o > best_iou) {
                best_iou = o;
                best = static_cast<long>(g);
            }
        }
        if (best >= 0 && best_iou >= iou_min) {
            taken[static_cast<std::size_t>(best)] = true;
            m.true_positive[d] = true;
            m.matched_gt[d] = best;
            ++m.tp;
        } else {
            ++m.fp;
        }
    }
    m.fn = gts.size() - m.tp;
    return m;
}

struct RecallPrecision {
    double recall = 0.0;
    double precision = 0.0;
};

/// r = TP/(TP+FN), p = TP/(TP+FP), as fractions; 0/0 is 0.
inline RecallPrecision precision_recall(std::size_t tp, std::size_t fp, std::size_t fn) {
    RecallPrecision out;
    if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    return out;
}

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
};

using PrCurve = std::vector<PrPoint>;

/// One point per detection, in score order.
inline PrCurve pr_curve(const MatchResult& match, std::size_t gt_count) {
    PrCurve curve;
    curve.reserve(match.order.size());
    std::size_t tp = 0;
    std::size_t seen = 0;
    for (std::size_t d : match.order) {
        ++seen;
        if (match.true_positive[d]) ++tp;
        PrPoint p;
        p.recall = gt_count > 0 ? static_cast<double>(tp) / static_cast<double>(gt_count) : 0.0;
        p.precision = static_cast<double>(tp) / static_cast<double>(seen);
        curve.push_back(p);
    }
    return curve;
}

/// All-points interpolated area under the curve: each recall step is
/// weighted by the best precision reached at that recall or beyond.
inline double average_precision(const PrCurve& curve) {
    double ap = 0.0;
    double envelope = 0.0;
    // Walk backwards so the running max is the envelope at each point.
    std::vector<double> best(curve.size());
    for (std::size_t i = curve.size(); i-- > 0;) {
        envelope = std::max(envelope, curve[i].precision);
        best[i] = envelope;
    }
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].recall > prev_recall) {
            ap += (curve[i].recall - prev_recall) * best[i];
            prev_recall = curve[i].recall;
        }
    }
    return ap;
}

struct EvalReport {
    std::size_t gt_count = 0;
    std::size_t detection_count = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double recall = 0.0;
    double precision = 0.0;
    double ap = 0.0;
    PrCurve curve;
};

inline EvalReport evaluate(const std::vector<Detection>& dets,
                           const std::vector<GroundTruth>& gts, double iou_min = 0.5) {
    const MatchResult m = match_detections(dets, gts, iou_min);
    EvalReport r;
    r.gt_count = gts.size();
    r.detection_count = dets.size();
    r.tp = m.tp;
    r.fp = m.fp;
    r.fn = m.fn;
    const auto rp = precision_recall(m.tp, m.fp, m.fn);
    r.recall = rp.recall;
    r.precision = rp.precision;
    r.curve = pr_curve(m, gts.size());
    r.ap = average_precision(r.curve);
    return r;
}

}  // namespace bgsup
