#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "aed/errors.hpp"

namespace aed {

/// C (m x n) += A (m x k) * B (k x n), all row-major. The k-inner / j-inner
/// loop order keeps both C and B rows contiguous so the compiler can
/// vectorize the accumulation.
template <typename T>
void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* A, const T* B, T* C) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* a_row = A + i * k;
        T* c_row = C + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T a = a_row[p];
            if (a == T(0)) continue;
            const T* b_row = B + p * n;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
        }
    }
}

/// C (m x n) += A^T (m x k, stored k x m) * B (k x n).
template <typename T>
void gemm_at_b_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* A, const T* B, T* C) {
    for (std::size_t p = 0; p < k; ++p) {
        const T* a_row = A + p * m;
        const T* b_row = B + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const T a = a_row[i];
            if (a == T(0)) continue;
            T* c_row = C + i * n;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
        }
    }
}

/// C (m x n) += A (m x k) * B^T (n x k, stored n x k).
template <typename T>
void gemm_a_bt_accumulate(std::size_t m, std::size_t n, std::size_t k, const T* A, const T* B, T* C) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* a_row = A + i * k;
        T* c_row = C + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const T* b_row = B + j * k;
            T acc = T(0);
            for (std::size_t p = 0; p < k; ++p) acc += a_row[p] * b_row[p];
            c_row[j] += acc;
        }
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Deterministic; returns eigenvalues in descending order with matching
/// orthonormal eigenvectors as rows of `vectors`.
struct EighResult {
    std::vector<double> values;   // descending
    std::vector<double> vectors;  // d x d row-major, row i is the eigenvector of values[i]
};

inline EighResult jacobi_eigh(std::vector<double> a, std::size_t d) {
    if (a.size() != d * d) throw config_error("jacobi_eigh: bad matrix size");
    std::vector<double> v(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) s += a[i * d + j] * a[i * d + j];
        return std::sqrt(2.0 * s);
    };
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::abs(x));
    const double tol = (scale > 0.0 ? scale : 1.0) * 1e-14;

    for (int sweep = 0; sweep < 64 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::abs(apq) <= tol * 1e-2) continue;
                const double app = a[p * d + p];
                const double aqq = a[q * d + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a[k * d + p];
                    const double akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a[p * d + k];
                    const double aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vpk = v[p * d + k];
                    const double vqk = v[q * d + k];
                    v[p * d + k] = c * vpk - s * vqk;
                    v[q * d + k] = s * vpk + c * vqk;
                }
            }
        }
    }

    // Sort descending by eigenvalue; stable on ties.
    std::vector<std::size_t> order(d);
    for (std::size_t i = 0; i < d; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a[x * d + x] > a[y * d + y]; });
    EighResult res;
    res.values.resize(d);
    res.vectors.resize(d * d);
    for (std::size_t i = 0; i < d; ++i) {
        res.values[i] = a[order[i] * d + order[i]];
        for (std::size_t k = 0; k < d; ++k) res.vectors[i * d + k] = v[order[i] * d + k];
    }
    return res;
}

}  // namespace aed
