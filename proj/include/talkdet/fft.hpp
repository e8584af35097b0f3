#pragma once

#include <complex>
#include <vector>

#include "talkdet/error.hpp"
#include "talkdet/image.hpp"

// Complex FFT: iterative radix-2 for power-of-two sizes, Bluestein's
// chirp-z transform for everything else, so frames of any size can be
// filtered in the frequency domain.

namespace talkdet::fft {

using cd = std::complex<double>;

namespace detail {

inline bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline size_t next_pow2(size_t n) {
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place radix-2 Cooley-Tukey. n must be a power of two.
inline void fft_pow2(std::vector<cd>& a, bool inverse) {
    const size_t n = a.size();
    if (n <= 1) return;
    // bit reversal
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846;
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        cd wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                cd u = a[i + k];
                cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (cd& x : a) x /= static_cast<double>(n);
    }
}

} // namespace detail

// Plan for one transform length. Precomputes the Bluestein chirp when the
// length is not a power of two; reusable across rows/columns.
class Plan {
public:
    explicit Plan(size_t n) : n_(n) {
        if (n == 0) throw DimensionError("fft: zero-length transform");
        if (detail::is_pow2(n)) return;
        m_ = detail::next_pow2(2 * n - 1);
        chirp_.resize(n);
        const double pi = 3.14159265358979323846;
        for (size_t k = 0; k < n; ++k) {
            // k^2 mod 2n keeps the angle argument small
            double ang = pi * static_cast<double>((k * k) % (2 * n)) / static_cast<double>(n);
            chirp_[k] = cd(std::cos(ang), -std::sin(ang));
        }
        bq_.assign(m_, cd(0.0, 0.0));
        bq_[0] = std::conj(chirp_[0]);
        for (size_t k = 1; k < n; ++k) bq_[k] = bq_[m_ - k] = std::conj(chirp_[k]);
        detail::fft_pow2(bq_, false);
    }

    size_t length() const { return n_; }

    void forward(std::vector<cd>& a) const { run(a, false); }
    void inverse(std::vector<cd>& a) const { run(a, true); }

private:
    void run(std::vector<cd>& a, bool inverse) const {
        if (a.size() != n_) throw DimensionError("fft: input length does not match plan");
        if (detail::is_pow2(n_)) {
            detail::fft_pow2(a, inverse);
            return;
        }
        // Bluestein: x_k -> a_k = x_k * chirp_k, convolve with conj chirp.
        // Inverse via conjugation: ifft(x) = conj(fft(conj(x))) / n.
        std::vector<cd> x = a;
        if (inverse)
            for (cd& v : x) v = std::conj(v);
        std::vector<cd> aq(m_, cd(0.0, 0.0));
        for (size_t k = 0; k < n_; ++k) aq[k] = x[k] * chirp_[k];
        detail::fft_pow2(aq, false);
        for (size_t k = 0; k < m_; ++k) aq[k] *= bq_[k];
        detail::fft_pow2(aq, true);
        for (size_t k = 0; k < n_; ++k) {
            cd v = aq[k] * chirp_[k];
            a[k] = inverse ? std::conj(v) / static_cast<double>(n_) : v;
        }
    }

    size_t n_;
    size_t m_ = 0;
    std::vector<cd> chirp_;
    std::vector<cd> bq_;
};

inline void forward(std::vector<cd>& a) { Plan(a.size()).forward(a); }
inline void inverse(std::vector<cd>& a) { Plan(a.size()).inverse(a); }

// 2-D transforms, rows then columns. Data is row-major width x height.
class Plan2d {
public:
    Plan2d(int width, int height) : w_(width), h_(height), row_(static_cast<size_t>(width)), col_(static_cast<size_t>(height)) {
        if (width <= 0 || height <= 0) throw DimensionError("fft: non-positive 2-D size");
    }

    void forward(std::vector<cd>& a) const { run(a, false); }
    void inverse(std::vector<cd>& a) const { run(a, true); }

    std::vector<cd> forward_real(const Image<double>& img) const {
        if (img.width != w_ || img.height != h_) throw DimensionError("fft: image does not match plan size");
        std::vector<cd> a(img.size());
        for (size_t i = 0; i < img.size(); ++i) a[i] = cd(img.data[i], 0.0);
        forward(a);
        return a;
    }

private:
    void run(std::vector<cd>& a, bool inverse) const {
        if (a.size() != static_cast<size_t>(w_) * h_) throw DimensionError("fft: buffer does not match plan size");
        std::vector<cd> line(static_cast<size_t>(w_));
        for (int y = 0; y < h_; ++y) {
            std::copy(a.begin() + static_cast<size_t>(y) * w_, a.begin() + static_cast<size_t>(y + 1) * w_, line.begin());
            inverse ? row_.inverse(line) : row_.forward(line);
            std::copy(line.begin(), line.end(), a.begin() + static_cast<size_t>(y) * w_);
        }
        std::vector<cd> colbuf(static_cast<size_t>(h_));
        for (int x = 0; x < w_; ++x) {
            for (int y = 0; y < h_; ++y) colbuf[y] = a[static_cast<size_t>(y) * w_ + x];
            inverse ? col_.inverse(colbuf) : col_.forward(colbuf);
            for (int y = 0; y < h_; ++y) a[static_cast<size_t>(y) * w_ + x] = colbuf[y];
        }
    }

    int w_, h_;
    Plan row_, col_;
};

} // namespace talkdet::fft
