#pragma once

// Proximal maps used by the decomposition:
//   soft_threshold: prox of eps * ||X||_1, applied elementwise.
//   svt:            prox of eps * ||X||_*, soft-thresholds the singular values.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "bgsup/error.hpp"
#include "bgsup/framestack.hpp"

namespace bgsup {

/// Relative floor below which a singular value counts as zero for rank.
inline constexpr double kRankTolerance = 1e-12;

/// Thin SVD, r = min(m, n) columns in U and V.
struct SvdFactors {
    Matrix u;
    Vector singular_values;  // nonincreasing, nonnegative
    Matrix v;

    Matrix reconstruct() const {
        return u * singular_values.asDiagonal() * v.transpose();
    }
};

inline Eigen::Index numerical_rank(const Vector& spectrum) {
    if (spectrum.size() == 0 || spectrum(0) <= 0.0) return 0;
    const double floor = kRankTolerance * spectrum(0);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
        if (spectrum(i) > floor) ++r;
    }
    return r;
}

/// Deterministic thin SVD. Each column of U is signed so that its first
/// entry of largest magnitude is nonnegative; V is flipped to match.
inline SvdFactors svd(const Matrix& q) {
    if (!q.allFinite()) throw InputError("svd: matrix has non-finite entries");
    SvdFactors f;
    if (q.size() == 0) {
        f.u = Matrix(q.rows(), 0);
        f.v = Matrix(q.cols(), 0);
        return f;
    }
    Eigen::BDCSVD<Matrix> dec(q, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) throw NumericError("svd: factorization did not converge");
    f.u = dec.matrixU();
    f.singular_values = dec.singularValues();
    f.v = dec.matrixV();
    if (!f.u.allFinite() || !f.v.allFinite() || !f.singular_values.allFinite()) {
        throw NumericError("svd: factorization produced non-finite values");
    }

    for (Eigen::Index k = 0; k < f.u.cols(); ++k) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < f.u.rows(); ++i) {
            const double a = std::abs(f.u(i, k));
            if (a > best) {
                best = a;
                pivot = i;
            }
        }
        if (f.u(pivot, k) < 0.0) {
            f.u.col(k) = -f.u.col(k);
            f.v.col(k) = -f.v.col(k);
        }
    }
    return f;
}

inline double soft_threshold(double q, double eps) {
    const double mag = std::abs(q) - eps;
    if (mag <= 0.0) return 0.0;
    return q > 0.0 ? mag : -mag;
}

/// Elementwise sign(q) * max(|q| - eps, 0).
inline Matrix soft_threshold(const Matrix& q, double eps) {
    if (!(eps >= 0.0)) {
        throw InputError("soft_threshold: threshold must be nonnegative, got " +
                         std::to_string(eps));
    }
    if (eps == 0.0) return q;
    return q.unaryExpr([eps](double v) { return soft_threshold(v, eps); });
}

struct SvtResult {
    Matrix value;
    Vector spectrum;  // thresholded singular values, nonincreasing
    Eigen::Index rank = 0;
};

/// Singular-value thresholding with the thresholded spectrum and rank.
inline SvtResult svt_detailed(const Matrix& q, double eps) {
    if (!(eps >= 0.0)) {
        throw InputError("svt: threshold must be nonnegative, got " + std::to_string(eps));
    }
    SvdFactors f = svd(q);
    SvtResult out;
    out.spectrum = (f.singular_values.array() - eps).cwiseMax(0.0).matrix();
    // Entries past the first zero contribute nothing.
    Eigen::Index keep = 0;
    while (keep < out.spectrum.size() && out.spectrum(keep) > 0.0) ++keep;
    out.value = f.u.leftCols(keep) * out.spectrum.head(keep).asDiagonal() *
                f.v.leftCols(keep).transpose();
    out.rank = numerical_rank(out.spectrum);
    return out;
}

inline Matrix svt(const Matrix& q, double eps) { return svt_detailed(q, eps).value; }

}  // namespace bgsup
