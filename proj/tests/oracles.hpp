#pragma once

// Reference computations used only by tests. Each one reaches its answer by
// a different route than the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "bgsup/metrics.hpp"

namespace oracle {

using bgsup::Matrix;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng,
                            double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
}

/// Singular values via the symmetric eigenproblem of the Gram matrix.
inline Eigen::VectorXd gram_singular_values(const Matrix& q) {
    const bool tall = q.rows() >= q.cols();
    const Matrix g = tall ? Matrix(q.transpose() * q) : Matrix(q * q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    return s;
}

/// Singular-value thresholding through the Gram eigendecomposition:
/// Q V diag(max(s - eps, 0) / s) V^T for tall Q (mirrored for wide Q).
inline Matrix gram_svt(const Matrix& q, double eps) {
    const bool tall = q.rows() >= q.cols();
    const Matrix g = tall ? Matrix(q.transpose() * q) : Matrix(q * q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const Eigen::VectorXd lambda = es.eigenvalues();
    Eigen::VectorXd gain(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double s = std::sqrt(std::max(lambda(i), 0.0));
        gain(i) = s > eps ? (s - eps) / s : 0.0;
    }
    const Matrix& v = es.eigenvectors();
    const Matrix shrink = v * gain.asDiagonal() * v.transpose();
    return tall ? Matrix(q * shrink) : Matrix(shrink * q);
}

/// argmin_x eps|x| + (x - q)^2 / 2 by grid search on [q-2eps-1, q+2eps+1].
inline double grid_soft_threshold(double q, double eps, double step = 1e-4) {
    const double lo = q - 2.0 * eps - 1.0;
    const double hi = q + 2.0 * eps + 1.0;
    double best_x = lo;
    double best_f = std::numeric_limits<double>::infinity();
    const auto steps = static_cast<long>(std::ceil((hi - lo) / step));
    for (long k = 0; k <= steps; ++k) {
        const double x = lo + static_cast<double>(k) * step;
        const double f = eps * std::abs(x) + 0.5 * (x - q) * (x - q);
        if (f < best_f) {
            best_f = f;
            best_x = x;
        }
    }
    return best_x;
}

inline double nuclear_norm(const Matrix& m) { return gram_singular_values(m).sum(); }

// ---------------------------------------------------------------------------
// Detection matching by exhaustive assignment

struct MatchLabels {
    std::vector<bool> true_positive;  // by detection index
    std::vector<long> matched_gt;
    std::size_t tp = 0, fp = 0, fn = 0;
};

inline std::vector<std::size_t> sorted_by_score(const std::vector<bgsup::Detection>& dets) {
    std::vector<std::size_t> idx(dets.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = dets[a];
        const auto& y = dets[b];
        return std::make_tuple(-x.score, x.frame_index, x.box.y, x.box.x, a) <
               std::make_tuple(-y.score, y.frame_index, y.box.y, y.box.x, b);
    });
    return idx;
}

/// Enumerates every injective same-frame assignment with IoU >= iou_min and
/// keeps the one whose per-detection key (matched, IoU, -gt index), read in
/// score order, is lexicographically largest.
inline MatchLabels exhaustive_match(const std::vector<bgsup::Detection>& dets,
                                    const std::vector<bgsup::GroundTruth>& gts, double iou_min) {
    const auto order = sorted_by_score(dets);
    using Key = std::tuple<int, double, long>;
    std::vector<Key> best_key;
    std::vector<long> best_assign;
    std::vector<long> assign(order.size(), -1);
    std::vector<bool> used(gts.size(), false);

    std::function<void(std::size_t)> rec = [&](std::size_t k) {
        if (k == order.size()) {
            std::vector<Key> key;
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (assign[i] < 0) {
                    key.emplace_back(0, 0.0, 0);
                } else {
                    const auto g = static_cast<std::size_t>(assign[i]);
                    key.emplace_back(1, bgsup::iou(dets[order[i]].box, gts[g].box), -assign[i]);
                }
            }
            if (best_assign.empty() || key > best_key) {
                best_key = key;
                best_assign = assign;
            }
            return;
        }
        assign[k] = -1;
        rec(k + 1);
        const auto& d = dets[order[k]];
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (used[g] || gts[g].frame_index != d.frame_index) continue;
            if (bgsup::iou(d.box, gts[g].box) < iou_min) continue;
            used[g] = true;
            assign[k] = static_cast<long>(g);
            rec(k + 1);
            used[g] = false;
            assign[k] = -1;
        }
    };
    rec(0);

    MatchLabels out;
    out.true_positive.assign(dets.size(), false);
    out.matched_gt.assign(dets.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (best_assign[i] >= 0) {
            out.true_positive[order[i]] = true;
            out.matched_gt[order[i]] = best_assign[i];
            ++out.tp;
        } else {
            ++out.fp;
        }
    }
    out.fn = gts.size() - out.tp;
    return out;
}

// ---------------------------------------------------------------------------
// Average precision by sweeping the score threshold

/// For every distinct score t, (recall, precision) of the detections with
/// score >= t. The integral of the upper envelope of precision over recall
/// is then summed interval by interval.
inline double threshold_sweep_ap(const std::vector<bgsup::Detection>& dets,
                                 const std::vector<bool>& true_positive, std::size_t gt_count) {
    if (gt_count == 0 || dets.empty()) return 0.0;
    std::vector<double> thresholds;
    for (const auto& d : dets) thresholds.push_back(d.score);
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<std::pair<double, double>> points;  // (recall, precision)
    for (double t : thresholds) {
        std::size_t kept = 0, tp = 0;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (dets[i].score >= t) {
                ++kept;
                if (true_positive[i]) ++tp;
            }
        }
        points.emplace_back(static_cast<double>(tp) / static_cast<double>(gt_count),
                            static_cast<double>(tp) / static_cast<double>(kept));
    }

    std::vector<double> recalls{0.0};
    for (const auto& p : points) recalls.push_back(p.first);
    std::sort(recalls.begin(), recalls.end());
    recalls.erase(std::unique(recalls.begin(), recalls.end()), recalls.end());

    double ap = 0.0;
    for (std::size_t i = 1; i < recalls.size(); ++i) {
        double envelope = 0.0;
        for (const auto& p : points) {
            if (p.first >= recalls[i]) envelope = std::max(envelope, p.second);
        }
        ap += (recalls[i] - recalls[i - 1]) * envelope;
    }
    return ap;
}

/// Random boxes inside a 40x40 frame.
inline bgsup::BoundingBox random_box(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pos(0, 30), ext(2, 10);
    return {pos(rng), pos(rng), ext(rng), ext(rng)};
}

/// Detections clustered around ground truths so that matches, misses and
/// duplicates all occur.
inline void random_instance(std::mt19937_64& rng, std::vector<bgsup::Detection>& dets,
                            std::vector<bgsup::GroundTruth>& gts, std::size_t max_gt = 4,
                            std::size_t max_det = 6) {
    std::uniform_int_distribution<std::size_t> ngt(0, max_gt), ndet(0, max_det), frame(0, 1);
    std::uniform_int_distribution<int> jitter(-2, 2);
    std::uniform_real_distribution<double> score(0.0, 1.0), coin(0.0, 1.0);
    dets.clear();
    gts.clear();
    const std::size_t g = ngt(rng);
    for (std::size_t i = 0; i < g; ++i) gts.push_back({frame(rng), random_box(rng)});
    const std::size_t n = ndet(rng);
    for (std::size_t i = 0; i < n; ++i) {
        bgsup::Detection d;
        if (!gts.empty() && coin(rng) < 0.7) {
            std::uniform_int_distribution<std::size_t> pick(0, gts.size() - 1);
            const auto& base = gts[pick(rng)];
            d.frame_index = base.frame_index;
            d.box = base.box;
            d.box.x += jitter(rng);
            d.box.y += jitter(rng);
            d.box.w = std::max<std::int64_t>(1, d.box.w + jitter(rng));
            d.box.h = std::max<std::int64_t>(1, d.box.h + jitter(rng));
        } else {
            d.frame_index = frame(rng);
            d.box = random_box(rng);
        }
        d.score = score(rng);
        dets.push_back(d);
    }
}

}  // namespace oracle

namespace oracle {

/// D = B0 + X0 + E0 with a rank-r nonnegative background (r random
/// "background images" mixed per frame), a sparse foreground of +-magnitude
/// on a `density` fraction of entries, and Gaussian noise.
struct RpcaInstance {
    Matrix d, b0, x0, e0;
};

inline RpcaInstance make_rpca_instance(Eigen::Index m, Eigen::Index n, Eigen::Index rank,
                                       double density, double magnitude, double noise_sigma,
                                       std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix images(m, rank), weights(n, rank);
    for (Eigen::Index i = 0; i < images.size(); ++i) images.data()[i] = u(rng);
    for (Eigen::Index j = 0; j < n; ++j) {
        double total = 0.0;
        for (Eigen::Index k = 0; k < rank; ++k) {
            weights(j, k) = u(rng);
            total += weights(j, k);
        }
        weights.row(j) /= total;
    }
    RpcaInstance inst;
    inst.b0 = images * weights.transpose();
    inst.x0 = Matrix::Zero(m, n);
    inst.e0 = Matrix(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            if (u(rng) < density) inst.x0(i, j) = u(rng) < 0.5 ? magnitude : -magnitude;
            inst.e0(i, j) = noise_sigma * g(rng);
        }
    }
    inst.d = inst.b0 + inst.x0 + inst.e0;
    return inst;
}

/// F1 of the supports {|a| > t} and {|b| > t}.
inline double support_f1(const Matrix& estimate, const Matrix& truth, double t) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        const bool e = std::abs(estimate.data()[i]) > t;
        const bool g = std::abs(truth.data()[i]) > t;
        tp += e && g;
        fp += e && !g;
        fn += !e && g;
    }
    if (tp == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace oracle
