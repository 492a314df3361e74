#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "digitrec/audio.hpp"

namespace digitrec {

enum class WindowKind { kHamming, kRectangular };

struct FrameConfig {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double pre_emphasis = 0.97;
  WindowKind window = WindowKind::kHamming;

  std::size_t frame_samples(int sample_rate) const;
  std::size_t shift_samples(int sample_rate) const;
  /// Throws InvalidArgument when the config cannot frame audio at this rate.
  void validate(int sample_rate) const;
};

/// Equal-length windowed frames stored row-major.
class FrameMatrix {
 public:
  FrameMatrix(std::size_t frame_length, FrameConfig config, int sample_rate)
      : frame_length_(frame_length), config_(config), sample_rate_(sample_rate) {}

  std::size_t num_frames() const noexcept { return frame_length_ == 0 ? 0 : data_.size() / frame_length_; }
  std::size_t frame_length() const noexcept { return frame_length_; }
  std::span<const double> frame(std::size_t i) const {
    return {data_.data() + i * frame_length_, frame_length_};
  }
  const FrameConfig& config() const noexcept { return config_; }
  int sample_rate() const noexcept { return sample_rate_; }

  void append(std::span<const double> frame);

 private:
  std::size_t frame_length_;
  FrameConfig config_;
  int sample_rate_;
  std::vector<double> data_;
};

/// y[0] = x[0](1 - c), y[n] = x[n] - c x[n-1]. Output may leave [-1, 1], so
/// it is returned as raw samples rather than an AudioBuffer.
std::vector<double> pre_emphasize(std::span<const double> samples, double coeff);
std::vector<double> pre_emphasize(const AudioBuffer& buffer, double coeff);

std::vector<double> make_window(WindowKind kind, std::size_t length);

/// Frames already-conditioned samples; trailing partial frames are dropped.
FrameMatrix frame_signal(std::span<const double> samples, int sample_rate, const FrameConfig& config);
FrameMatrix frame_signal(const AudioBuffer& buffer, const FrameConfig& config);

/// Pre-emphasis followed by framing and windowing.
FrameMatrix analyze(const AudioBuffer& buffer, const FrameConfig& config);

std::size_t next_pow2(std::size_t n) noexcept;

/// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

/// |DFT|^2 of the zero-padded frame, bins 0..fft_size/2.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size);

/// r[k] = sum_n x[n] x[n+k] for k = 0..max_lag.
std::vector<double> autocorrelation(std::span<const double> frame, std::size_t max_lag);

}  // namespace digitrec
