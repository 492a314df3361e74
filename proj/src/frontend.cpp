#include "digitrec/frontend.hpp"

#include <cmath>

#include "digitrec/error.hpp"

namespace digitrec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::size_t FrameConfig::frame_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_length_ms * sample_rate / 1000.0));
}

std::size_t FrameConfig::shift_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::lround(frame_shift_ms * sample_rate / 1000.0));
}

void FrameConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) fail(Errc::kInvalidRate, "sample rate must be positive");
  if (!(frame_shift_ms > 0.0) || frame_shift_ms > frame_length_ms) {
    fail(Errc::kInvalidArgument, "frame shift must satisfy 0 < shift <= length");
  }
  if (!(pre_emphasis >= 0.0 && pre_emphasis < 1.0)) {
    fail(Errc::kInvalidArgument, "pre-emphasis must lie in [0, 1)");
  }
  if (frame_samples(sample_rate) < 2) fail(Errc::kInvalidArgument, "frame shorter than two samples");
  if (shift_samples(sample_rate) < 1) fail(Errc::kInvalidArgument, "frame shift below one sample");
}

void FrameMatrix::append(std::span<const double> frame) {
  if (frame.size() != frame_length_) fail(Errc::kInvalidArgument, "frame length mismatch");
  data_.insert(data_.end(), frame.begin(), frame.end());
}

std::vector<double> pre_emphasize(std::span<const double> x, double coeff) {
  if (!(coeff >= 0.0 && coeff < 1.0)) fail(Errc::kInvalidArgument, "pre-emphasis must lie in [0, 1)");
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0] * (1.0 - coeff);
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = x[n] - coeff * x[n - 1];
  return y;
}

std::vector<double> pre_emphasize(const AudioBuffer& buffer, double coeff) {
  return pre_emphasize(buffer.samples(), coeff);
}

std::vector<double> make_window(WindowKind kind, std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (kind == WindowKind::kHamming && length > 1) {
    const double denom = static_cast<double>(length - 1);
    for (std::size_t i = 0; i < length; ++i) {
      w[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / denom);
    }
    // cos() is not exactly symmetric about pi; mirror to keep the window so.
    for (std::size_t i = 0; i < length / 2; ++i) w[length - 1 - i] = w[i];
  }
  return w;
}

FrameMatrix frame_signal(std::span<const double> samples, int sample_rate, const FrameConfig& config) {
  config.validate(sample_rate);
  const std::size_t len = config.frame_samples(sample_rate);
  const std::size_t shift = config.shift_samples(sample_rate);
  FrameMatrix frames(len, config, sample_rate);
  if (samples.size() < len) return frames;
  const auto window = make_window(config.window, len);
  std::vector<double> buf(len);
  for (std::size_t start = 0; start + len <= samples.size(); start += shift) {
    for (std::size_t i = 0; i < len; ++i) buf[i] = samples[start + i] * window[i];
    frames.append(buf);
  }
  return frames;
}

FrameMatrix frame_signal(const AudioBuffer& buffer, const FrameConfig& config) {
  return frame_signal(buffer.samples(), buffer.sample_rate(), config);
}

FrameMatrix analyze(const AudioBuffer& buffer, const FrameConfig& config) {
  const auto emphasized = pre_emphasize(buffer.samples(), config.pre_emphasis);
  return frame_signal(emphasized, buffer.sample_rate(), config);
}

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) fail(Errc::kInvalidFftSize, "FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  // Twiddles come from a per-size table computed directly (no recurrence),
  // so rounding error does not grow with the transform size.
  thread_local std::vector<std::complex<double>> twiddles;
  if (twiddles.size() != n / 2) {
    twiddles.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
      twiddles[k] = {std::cos(ang), std::sin(ang)};
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + half] * twiddles[k * stride];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size) {
  if (fft_size == 0 || (fft_size & (fft_size - 1)) != 0 || fft_size < frame.size()) {
    fail(Errc::kInvalidFftSize, "FFT size must be a power of two no smaller than the frame");
  }
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  fft(buf);
  std::vector<double> out(fft_size / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(buf[k]);
  return out;
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  if (max_lag >= x.size()) fail(Errc::kLagTooLarge, "max lag must be below the frame length");
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t n = 0; n + k < x.size(); ++n) acc += x[n] * x[n + k];
    r[k] = acc;
  }
  return r;
}

}  // namespace digitrec
