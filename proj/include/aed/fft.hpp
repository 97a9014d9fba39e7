#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "aed/errors.hpp"

namespace aed {

/// In-place iterative radix-2 FFT with a cached twiddle table.
/// Forward transform is unnormalized, X_k = sum_n x_n e^{-2*pi*i*k*n/N};
/// inverse scales by 1/N. Sizes must be powers of two.
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n == 0 || (n & (n - 1)) != 0) throw config_error("Fft: size must be a power of two");
        rev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
        tw_.resize(n / 2);
        const double step = -2.0 * 3.14159265358979323846 / static_cast<double>(n);
        for (std::size_t k = 0; k < n / 2; ++k)
            tw_[k] = std::complex<double>(std::cos(step * static_cast<double>(k)),
                                          std::sin(step * static_cast<double>(k)));
    }

    std::size_t size() const { return n_; }

    void forward(std::vector<std::complex<double>>& a) const { transform(a); }

    void inverse(std::vector<std::complex<double>>& a) const {
        for (auto& v : a) v = std::conj(v);
        transform(a);
        const double inv = 1.0 / static_cast<double>(n_);
        for (auto& v : a) v = std::conj(v) * inv;
    }

    static std::size_t next_pow2(std::size_t n) {
        std::size_t p = 1;
        while (p < n) p <<= 1;
        return p;
    }

private:
    void transform(std::vector<std::complex<double>>& a) const {
        if (a.size() != n_) throw config_error("Fft: buffer size mismatch");
        for (std::size_t i = 0; i < n_; ++i)
            if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t stride = n_ / len;
            const std::size_t half = len / 2;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    const std::complex<double> w = tw_[k * stride];
                    const std::complex<double> u = a[start + k];
                    const std::complex<double> t = a[start + k + half] * w;
                    a[start + k] = u + t;
                    a[start + k + half] = u - t;
                }
            }
        }
    }

    std::size_t n_;
    std::vector<std::size_t> rev_;
    std::vector<std::complex<double>> tw_;
};

}  // namespace aed
