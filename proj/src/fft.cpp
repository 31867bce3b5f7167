#include "emscale/fft.hpp"

#include <cmath>
#include <numbers>

#include "emscale/error.hpp"

namespace emscale::spectral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(std::size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

DftPlan::DftPlan(std::size_t n) : n_(n), pow2_(is_pow2(n)) {
    if (n == 0) throw ConfigError("DFT length must be positive");
    fft_size_ = pow2_ ? n : next_pow2(2 * n - 1);

    bitrev_.resize(fft_size_);
    const int bits = static_cast<int>(std::round(std::log2(static_cast<double>(fft_size_))));
    for (std::size_t i = 0; i < fft_size_; ++i) {
        std::size_t r = 0;
        for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
        bitrev_[i] = r;
    }
    twiddle_.resize(fft_size_ / 2);
    for (std::size_t k = 0; k < fft_size_ / 2; ++k) {
        const double a = -kTwoPi * static_cast<double>(k) / static_cast<double>(fft_size_);
        twiddle_[k] = {std::cos(a), std::sin(a)};
    }

    if (!pow2_) {
        chirp_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            // k^2 mod 2n keeps the phase argument small for long transforms.
            const double m = std::fmod(static_cast<double>(k) * static_cast<double>(k),
                                       2.0 * static_cast<double>(n_));
            const double a = -std::numbers::pi * m / static_cast<double>(n_);
            chirp_[k] = {std::cos(a), std::sin(a)};
        }
        std::vector<std::complex<double>> b(fft_size_, {0.0, 0.0});
        b[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n_; ++k) {
            b[k] = std::conj(chirp_[k]);
            b[fft_size_ - k] = std::conj(chirp_[k]);
        }
        fft_inplace(b.data(), false);
        chirp_kernel_ = std::move(b);
    }
}

void DftPlan::fft_inplace(std::complex<double>* a, bool inverse) const {
    const std::size_t n = fft_size_;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t step = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < half; ++k) {
                std::complex<double> w = twiddle_[k * step];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = a[base + k];
                const std::complex<double> v = a[base + k + half] * w;
                a[base + k] = u + v;
                a[base + k + half] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= inv;
    }
}

void DftPlan::forward(const double* in, std::complex<double>* out) const {
    if (pow2_) {
        std::vector<std::complex<double>> work(n_);
        for (std::size_t i = 0; i < n_; ++i) work[i] = {in[i], 0.0};
        fft_inplace(work.data(), false);
        for (std::size_t i = 0; i < n_; ++i) out[i] = work[i];
        return;
    }
    // Bluestein: X[k] = chirp[k] * (a * b)[k] with a[m] = x[m] chirp[m].
    std::vector<std::complex<double>> work(fft_size_, {0.0, 0.0});
    for (std::size_t m = 0; m < n_; ++m) work[m] = in[m] * chirp_[m];
    fft_inplace(work.data(), false);
    for (std::size_t i = 0; i < fft_size_; ++i) work[i] *= chirp_kernel_[i];
    fft_inplace(work.data(), true);
    for (std::size_t k = 0; k < n_; ++k) out[k] = work[k] * chirp_[k];
}

std::vector<std::complex<double>> dft_oracle(const std::vector<double>& frame) {
    if (frame.empty()) throw ConfigError("dft_oracle: empty frame");
    const std::size_t n = frame.size();
    std::vector<std::complex<double>> spectrum(n);
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double a = -kTwoPi * static_cast<double>(k) * static_cast<double>(m) /
                             static_cast<double>(n);
            re += frame[m] * std::cos(a);
            im += frame[m] * std::sin(a);
        }
        spectrum[k] = {re, im};
    }
    return spectrum;
}

}  // namespace emscale::spectral
