#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace digitrec {

/// Normalized mono PCM signal. Samples are kept in [-1, +1].
class AudioBuffer {
 public:
  AudioBuffer() = default;
  /// Throws InvalidRate for a non-positive rate and InvalidArgument for
  /// samples outside [-1, +1] or non-finite.
  AudioBuffer(std::vector<double> samples, int sample_rate, int source_bit_depth = 24);

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  int sample_rate() const noexcept { return sample_rate_; }
  int source_bit_depth() const noexcept { return source_bit_depth_; }
  double duration_seconds() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  /// Releases the sample storage (for moving into a new buffer).
  std::vector<double> take_samples() && { return std::move(samples_); }

 private:
  std::vector<double> samples_;
  int sample_rate_ = 16000;
  int source_bit_depth_ = 24;
};

struct EncodingProfile {
  std::string label;
  int bit_depth = 16;
  int sample_rate = 16000;
  std::string description;
};

/// bit_depth x sample_rate x 1 channel, in bits per second.
std::uint64_t bit_rate(const EncodingProfile& profile) noexcept;

/// Renders a bit rate the way audio format tables usually do: plain bps below
/// 100 kbps, truncated whole kbps below 1 Mbps, and Mbps truncated to one
/// decimal above (705600 -> "705 kbps", 1152000 -> "1.1 Mbps").
std::string bit_rate_display(std::uint64_t bps);

/// Throws UnsupportedDepth unless depth is 8, 16 or 24.
void check_bit_depth(int depth);

/// Profiles shipped with the library: the five standard formats table
/// entries plus the 16 bit / 16 kHz recording profile used by the grid.
const std::vector<EncodingProfile>& builtin_profiles();

/// Profiles that make up the standard audio formats table (landline through
/// DVD), in ascending bit-rate order.
std::vector<EncodingProfile> standard_format_profiles();

/// The five recording profiles of the default experiment grid.
std::vector<EncodingProfile> grid_profiles();

/// Lookup by label in builtin_profiles(); throws Config when unknown.
EncodingProfile find_profile(const std::string& label);
EncodingProfile find_profile(const std::vector<EncodingProfile>& catalog, const std::string& label);

/// Reads "label, depth, rate[, description]" lines; '#' starts a comment.
std::vector<EncodingProfile> read_profile_catalog(const std::filesystem::path& path);
void write_profile_catalog(const std::vector<EncodingProfile>& catalog,
                           const std::filesystem::path& path);

enum class NoiseKind { kClean, kFan, kRandom };

const char* noise_kind_name(NoiseKind kind) noexcept;
std::optional<NoiseKind> parse_noise_kind(std::string_view name) noexcept;

struct NoiseCondition {
  NoiseKind kind = NoiseKind::kClean;
  double snr_db = std::numeric_limits<double>::infinity();
  /// Optional recorded noise; builtin_noise() is used when empty.
  std::filesystem::path noise_wav;
};

// ---------------------------------------------------------------------------
// WAV I/O

AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

void write_wav(const AudioBuffer& buffer, int bit_depth, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, int bit_depth);

// ---------------------------------------------------------------------------
// Signal conversion

/// Uniform mid-tread quantizer with step 2 / 2^depth; levels are integer
/// multiples of the step in [-1, +1].
AudioBuffer requantize(const AudioBuffer& buffer, int target_depth);

/// Windowed-sinc polyphase resampler with a Kaiser-windowed low-pass whose
/// stop band starts at the lower of the two Nyquist frequencies.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

struct MixResult {
  AudioBuffer audio;
  double gain = 0.0;
  std::size_t clipped = 0;
};

/// signal + g * noise with g = (rms_s / rms_n) * 10^(-snr/20), hard clipped.
/// An infinite snr_db returns the signal unchanged. Shorter noise is tiled.
MixResult mix_noise(const AudioBuffer& signal, const AudioBuffer& noise, double snr_db);

double rms(std::span<const double> samples) noexcept;

}  // namespace digitrec
