#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace emscale::spectral {

// Exact discrete Fourier transform for arbitrary lengths: radix-2 for powers
// of two, Bluestein's chirp-z construction for everything else (the analysis
// window sizes are not restricted to powers of two). Plans are immutable
// after construction and safe to share across threads.
class DftPlan {
public:
    explicit DftPlan(std::size_t n);

    std::size_t size() const { return n_; }

    // out must hold n complex bins; in must hold n real samples.
    void forward(const double* in, std::complex<double>* out) const;

private:
    std::size_t n_;
    std::size_t fft_size_ = 0;                       // power-of-two work size
    std::vector<std::complex<double>> twiddle_;      // radix-2 stage factors
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> chirp_;        // exp(-i pi k^2 / n)
    std::vector<std::complex<double>> chirp_kernel_; // FFT of the conjugate chirp
    bool pow2_;

    void fft_inplace(std::complex<double>* a, bool inverse) const;
};

// Direct O(n^2) evaluation of X[k] = sum_n x[n] e^{-i 2 pi k n / N}.
// Deliberately shares no code with DftPlan; it is the verification route.
std::vector<std::complex<double>> dft_oracle(const std::vector<double>& frame);

}  // namespace emscale::spectral
