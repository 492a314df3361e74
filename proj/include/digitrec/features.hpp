#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "digitrec/frontend.hpp"

namespace digitrec {

// Tag values are written to feature and model files.
enum class FeatureKind : std::uint8_t { kMfcc = 1, kLpc = 2, kPlp = 3, kFbank = 4, kMelspec = 5 };

const char* feature_kind_name(FeatureKind kind) noexcept;        // "mfcc"
const char* feature_kind_display(FeatureKind kind) noexcept;     // "MFCC"
std::optional<FeatureKind> parse_feature_kind(std::string_view name) noexcept;
std::optional<FeatureKind> feature_kind_from_tag(std::uint8_t tag) noexcept;
const std::vector<FeatureKind>& all_feature_kinds();

struct FeatureConfig {
  FeatureKind kind = FeatureKind::kMfcc;
  int num_filters = 26;      // mel channels, or critical bands for PLP
  int num_ceps = 12;         // MFCC / PLP cepstra
  int lpc_order = 12;        // LPC output order and PLP all-pole order
  int include_deltas = 2;    // 0 static, 1 +delta, 2 +delta-delta
  int delta_window = 2;
  double energy_floor = 1e-10;
  bool use_energy = true;    // MFCC: replace c0 with log frame energy

  /// Throws InvalidArgument on an inconsistent configuration.
  void validate() const;
  /// Coefficients per frame before delta augmentation.
  int base_dim() const;
  int dim() const { return base_dim() * (1 + include_deltas); }
};

/// Identifies the feature stream a model was trained on.
struct FeatureSignature {
  FeatureKind kind = FeatureKind::kMfcc;
  std::uint32_t dim = 0;
  std::uint64_t config_hash = 0;

  bool operator==(const FeatureSignature&) const = default;
};

/// Frames x coefficients, row-major.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(FeatureKind kind, std::size_t dim, std::uint32_t frame_shift_us);

  FeatureKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_frames() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::uint32_t frame_shift_us() const noexcept { return frame_shift_us_; }

  std::span<const double> row(std::size_t t) const { return {data_.data() + t * dim_, dim_}; }
  std::span<double> row(std::size_t t) { return {data_.data() + t * dim_, dim_}; }
  std::span<const double> values() const noexcept { return data_; }

  void append_row(std::span<const double> row);

  /// Configuration the matrix was computed with. Matrices read from disk
  /// only know their kind; the remaining fields hold defaults.
  const FeatureConfig& config() const noexcept { return config_; }
  void set_config(const FeatureConfig& config) { config_ = config; }

  FeatureSignature signature() const;

  bool operator==(const FeatureMatrix& other) const {
    return kind_ == other.kind_ && dim_ == other.dim_ && frame_shift_us_ == other.frame_shift_us_ &&
           data_ == other.data_;
  }

 private:
  FeatureKind kind_ = FeatureKind::kMfcc;
  std::size_t dim_ = 0;
  std::uint32_t frame_shift_us_ = 0;
  std::vector<double> data_;
  FeatureConfig config_;
};

// ---------------------------------------------------------------------------
// Building blocks

/// 2595 log10(1 + f / 700).
double mel_scale(double freq_hz);
double inverse_mel_scale(double mel);

/// Triangular filters with centres equally spaced in mel between 0 Hz and
/// Nyquist. Weights are built once per (rate, FFT size, filter count).
class MelFilterbank {
 public:
  MelFilterbank(int sample_rate, std::size_t fft_size, int num_filters);

  std::vector<double> apply(std::span<const double> power) const;
  int num_filters() const noexcept { return static_cast<int>(first_bin_.size()); }
  /// Sum of filter weights over the spectrum bins.
  double area(int filter) const;
  /// Centre frequency of a filter in Hz.
  double center_hz(int filter) const { return centers_hz_[static_cast<std::size_t>(filter)]; }

 private:
  std::vector<std::size_t> first_bin_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> centers_hz_;
  std::size_t num_bins_ = 0;
};

std::vector<double> mel_filterbank(std::span<const double> power, int sample_rate, int num_filters);

/// Orthonormal DCT-II.
std::vector<double> dct_ii(std::span<const double> x);

struct LpcResult {
  std::vector<double> coeffs;      // a_1..a_p, prediction x^[n] = -sum a_i x[n-i]
  std::vector<double> reflection;  // k_1..k_p
  double error = 0.0;
  bool degenerate = false;
};

/// Solves the autocorrelation normal equations of order r.size() - 1.
/// r[0] <= floor yields the zero solution with degenerate = true.
LpcResult levinson_durbin(std::span<const double> r, double floor = 0.0);

/// Cepstrum c_1..c_n of the all-pole model 1 / A(z).
std::vector<double> lpc_to_cepstrum(std::span<const double> a, int n);

/// Bark scale used by PLP: 6 asinh(f / 600).
double bark_scale(double freq_hz);

/// Equal-loudness weight at angular frequency w = 2 pi f.
double equal_loudness(double freq_hz);

/// Cube-root intensity-loudness compression.
inline double loudness_compress(double intensity) { return std::cbrt(intensity); }

// ---------------------------------------------------------------------------
// Extractors. Each consumes framed audio and returns static features; use
// extract() for the full pipeline including deltas.

FeatureMatrix extract_melspec(const FrameMatrix& frames, const FeatureConfig& config);
FeatureMatrix extract_fbank(const FrameMatrix& frames, const FeatureConfig& config);
FeatureMatrix extract_mfcc(const FrameMatrix& frames, const FeatureConfig& config);
FeatureMatrix extract_lpc(const FrameMatrix& frames, const FeatureConfig& config);
FeatureMatrix extract_plp(const FrameMatrix& frames, const FeatureConfig& config);

FeatureMatrix extract_static(const FrameMatrix& frames, const FeatureConfig& config);

/// Regression deltas with edge replication; order 2 stacks delta-delta.
FeatureMatrix append_deltas(const FeatureMatrix& features, int order, int delta_window);

/// Pre-emphasis, framing, static extraction and deltas.
FeatureMatrix extract(const AudioBuffer& audio, const FrameConfig& frame_config,
                      const FeatureConfig& config);

// ---------------------------------------------------------------------------
// Feature files: "DFE1", kind u8, dim u32, frames u32, shift us u32, then
// float32 LE row-major.

std::vector<std::uint8_t> encode_features(const FeatureMatrix& features);
FeatureMatrix decode_features(const std::vector<std::uint8_t>& bytes,
                              std::optional<FeatureKind> expected = std::nullopt);
void write_features(const FeatureMatrix& features, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path,
                            std::optional<FeatureKind> expected = std::nullopt);

}  // namespace digitrec
