#include "digitrec/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "digitrec/error.hpp"
#include "io_util.hpp"

namespace digitrec {

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate, int source_bit_depth)
    : samples_(std::move(samples)), sample_rate_(sample_rate), source_bit_depth_(source_bit_depth) {
  if (sample_rate_ <= 0) fail(Errc::kInvalidRate, "sample rate must be positive");
  for (double s : samples_) {
    if (!(s >= -1.0 && s <= 1.0)) fail(Errc::kInvalidArgument, "sample outside [-1, +1]");
  }
}

std::uint64_t bit_rate(const EncodingProfile& profile) noexcept {
  return static_cast<std::uint64_t>(profile.bit_depth) *
         static_cast<std::uint64_t>(profile.sample_rate);
}

std::string bit_rate_display(std::uint64_t bps) {
  if (bps < 100000) return std::to_string(bps) + " bps";
  if (bps < 1000000) return std::to_string(bps / 1000) + " kbps";
  const std::uint64_t tenths = bps / 100000;
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + " Mbps";
}

void check_bit_depth(int depth) {
  if (depth != 8 && depth != 16 && depth != 24) {
    fail(Errc::kUnsupportedDepth, "unsupported bit depth " + std::to_string(depth));
  }
}

const std::vector<EncodingProfile>& builtin_profiles() {
  static const std::vector<EncodingProfile> catalog = {
      {"pcm8-8k", 8, 8000, "Telephone (Landline)"},
      {"pcm8-16k", 8, 16000, "VoIP and Improved Telephony"},
      {"pcm16-16k", 16, 16000, "Wideband speech recording"},
      {"pcm16-32k", 16, 32000, "Broadcast Rate (Better than FM Radio)"},
      {"pcm16-44k1", 16, 44100, "Compact Disc"},
      {"pcm24-48k", 24, 48000, "High Resolution Audio (DVD)"},
  };
  return catalog;
}

std::vector<EncodingProfile> standard_format_profiles() {
  std::vector<EncodingProfile> out;
  for (const char* label : {"pcm8-8k", "pcm8-16k", "pcm16-32k", "pcm16-44k1", "pcm24-48k"}) {
    out.push_back(find_profile(label));
  }
  return out;
}

std::vector<EncodingProfile> grid_profiles() {
  std::vector<EncodingProfile> out;
  for (const char* label : {"pcm8-8k", "pcm8-16k", "pcm16-16k", "pcm16-44k1", "pcm24-48k"}) {
    out.push_back(find_profile(label));
  }
  return out;
}

EncodingProfile find_profile(const std::vector<EncodingProfile>& catalog, const std::string& label) {
  for (const auto& p : catalog) {
    if (p.label == label) return p;
  }
  fail(Errc::kConfig, "unknown profile '" + label + "'");
}

EncodingProfile find_profile(const std::string& label) {
  return find_profile(builtin_profiles(), label);
}

std::vector<EncodingProfile> read_profile_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIoFailure, "cannot open profile catalog " + path.string());
  std::vector<EncodingProfile> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split(line, ',');
    if (fields.size() < 3) {
      fail(Errc::kConfig, path.string() + ":" + std::to_string(lineno) + ": expected label, depth, rate");
    }
    EncodingProfile p;
    p.label = std::string(detail::trim(fields[0]));
    try {
      p.bit_depth = std::stoi(std::string(detail::trim(fields[1])));
      p.sample_rate = std::stoi(std::string(detail::trim(fields[2])));
    } catch (const std::exception&) {
      fail(Errc::kConfig, path.string() + ":" + std::to_string(lineno) + ": bad number");
    }
    if (fields.size() > 3) p.description = std::string(detail::trim(fields[3]));
    check_bit_depth(p.bit_depth);
    if (p.sample_rate <= 0) fail(Errc::kInvalidRate, "profile " + p.label + ": bad rate");
    out.push_back(std::move(p));
  }
  return out;
}

void write_profile_catalog(const std::vector<EncodingProfile>& catalog,
                           const std::filesystem::path& path) {
  std::ostringstream os;
  os << "# label, bit depth, sample rate (Hz), description\n";
  for (const auto& p : catalog) {
    os << p.label << ", " << p.bit_depth << ", " << p.sample_rate;
    if (!p.description.empty()) os << ", " << p.description;
    os << '\n';
  }
  detail::write_file_atomic(path, os.str());
}

const char* noise_kind_name(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::kClean: return "clean";
    case NoiseKind::kFan: return "fan";
    case NoiseKind::kRandom: return "random";
  }
  return "?";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) noexcept {
  if (name == "clean") return NoiseKind::kClean;
  if (name == "fan") return NoiseKind::kFan;
  if (name == "random") return NoiseKind::kRandom;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// WAV

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double decode_sample(const std::uint8_t* p, int bits) {
  switch (bits) {
    case 8: return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32: return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
  return 0.0;
}

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(Errc::kCorruptHeader, "not a RIFF/WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t len = le32(hdr + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (len < 16 || len > avail) fail(Errc::kCorruptHeader, "truncated fmt chunk");
      const std::uint8_t* f = bytes.data() + body;
      std::uint16_t format = le16(f);
      channels = le16(f + 2);
      rate = le32(f + 4);
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (len < 40) fail(Errc::kCorruptHeader, "truncated extensible fmt chunk");
        format = le16(f + 24);
      }
      if (format != kFormatPcm) {
        fail(Errc::kNotPcm, "WAV format code " + std::to_string(format) + " is not integer PCM");
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      // Writers that stream sometimes leave the length unset; take what exists.
      data_len = std::min<std::size_t>(len, avail);
      if (len != 0xFFFFFFFFu && len > avail) fail(Errc::kCorruptHeader, "truncated data chunk");
    }
    pos = body + len + (len & 1u);
  }
  if (!have_fmt || data == nullptr) fail(Errc::kCorruptHeader, "missing fmt or data chunk");
  if (channels == 0) fail(Errc::kCorruptHeader, "zero channels");
  if (rate == 0) fail(Errc::kCorruptHeader, "zero sample rate");
  if (bits != 8 && bits != 16 && bits != 24 && bits != 32) {
    fail(Errc::kUnsupportedDepth, "unsupported PCM depth " + std::to_string(bits));
  }
  const std::size_t width = bits / 8;
  const std::size_t frame = width * channels;
  const std::size_t frames = data_len / frame;
  std::vector<double> samples(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) acc += decode_sample(data + i * frame + c * width, bits);
    samples[i] = acc / channels;
  }
  // 32-bit integer input is carried at the finest supported resolution.
  return AudioBuffer(std::move(samples), static_cast<int>(rate), bits == 32 ? 24 : bits);
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, int bit_depth) {
  check_bit_depth(bit_depth);
  const std::size_t width = static_cast<std::size_t>(bit_depth / 8);
  const std::size_t data_len = buffer.size() * width;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_len);
  detail::ByteWriter w(out);
  w.bytes("RIFF", 4);
  w.u32(static_cast<std::uint32_t>(36 + data_len));
  w.bytes("WAVE", 4);
  w.bytes("fmt ", 4);
  w.u32(16);
  w.u16(kFormatPcm);
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(buffer.sample_rate()));
  w.u32(static_cast<std::uint32_t>(buffer.sample_rate() * width));
  w.u16(static_cast<std::uint16_t>(width));
  w.u16(static_cast<std::uint16_t>(bit_depth));
  w.bytes("data", 4);
  w.u32(static_cast<std::uint32_t>(data_len));
  const double scale = std::ldexp(1.0, bit_depth - 1);
  const auto lo = static_cast<long>(-scale);
  const auto hi = static_cast<long>(scale) - 1;
  for (double s : buffer.samples()) {
    const long code = std::clamp(std::lround(s * scale), lo, hi);
    switch (bit_depth) {
      case 8: out.push_back(static_cast<std::uint8_t>(code + 128)); break;
      case 16: w.u16(static_cast<std::uint16_t>(code)); break;
      case 24: {
        const auto u = static_cast<std::uint32_t>(code);
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
        out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
        out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
        break;
      }
    }
  }
  return out;
}

void write_wav(const AudioBuffer& buffer, int bit_depth, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buffer, bit_depth);
  detail::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

// ---------------------------------------------------------------------------
// Quantization

AudioBuffer requantize(const AudioBuffer& buffer, int target_depth) {
  check_bit_depth(target_depth);
  const double levels = std::ldexp(1.0, target_depth - 1);  // per unit amplitude
  std::vector<double> out(buffer.samples().begin(), buffer.samples().end());
  for (double& s : out) {
    s = std::clamp(std::nearbyint(s * levels) / levels, -1.0, 1.0);
  }
  return AudioBuffer(std::move(out), buffer.sample_rate(), target_depth);
}

// ---------------------------------------------------------------------------
// Resampling

namespace {

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

constexpr double kPi = 3.14159265358979323846;
constexpr double kStopbandDb = 80.0;
constexpr std::size_t kMaxTablePhases = 4096;

class Kernel {
 public:
  Kernel(int source_rate, int target_rate) {
    const double min_rate = std::min(source_rate, target_rate);
    // Cut-off (transition centre) at 0.45 x the lower rate, so the stop band
    // begins at the lower Nyquist frequency.
    cutoff_ = 0.45 * min_rate / source_rate;        // cycles per input sample
    const double transition = 0.1 * min_rate / source_rate;
    beta_ = 0.1102 * (kStopbandDb - 8.7);
    const double taps = (kStopbandDb - 7.95) / (2.285 * 2.0 * kPi * transition);
    half_width_ = std::max(2.0, taps / 2.0);
    reach_ = static_cast<int>(std::ceil(half_width_));
    i0_beta_ = bessel_i0(beta_);
  }

  int reach() const { return reach_; }

  // Taps for an output sample sitting `frac` input samples past input index i0;
  // taps[j] multiplies x[i0 - reach + 1 + j]. Normalized to unit DC gain.
  void taps(double frac, std::vector<double>& out) const {
    out.resize(static_cast<std::size_t>(2 * reach_));
    double sum = 0.0;
    for (int j = 0; j < 2 * reach_; ++j) {
      const double tau = frac - (j - reach_ + 1);
      const double v = value(tau);
      out[static_cast<std::size_t>(j)] = v;
      sum += v;
    }
    if (sum != 0.0) {
      for (double& v : out) v /= sum;
    }
  }

 private:
  double value(double tau) const {
    if (std::abs(tau) >= half_width_) return 0.0;
    const double x = 2.0 * cutoff_ * tau;
    const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
    const double r = tau / half_width_;
    const double window = bessel_i0(beta_ * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta_;
    return 2.0 * cutoff_ * sinc * window;
  }

  double cutoff_ = 0.0;
  double beta_ = 0.0;
  double half_width_ = 0.0;
  double i0_beta_ = 1.0;
  int reach_ = 0;
};

}  // namespace

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  if (target_rate <= 0) fail(Errc::kInvalidRate, "target rate must be positive");
  const int source_rate = buffer.sample_rate();
  if (target_rate == source_rate) return buffer;

  const std::int64_t g = std::gcd(source_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = source_rate / g;
  const auto n_in = static_cast<std::int64_t>(buffer.size());
  const std::int64_t n_out = (n_in * target_rate + source_rate / 2) / source_rate;

  const Kernel kernel(source_rate, target_rate);
  const int reach = kernel.reach();
  const bool tabulate = static_cast<std::size_t>(up) <= kMaxTablePhases;
  std::vector<std::vector<double>> table;
  if (tabulate) {
    table.resize(static_cast<std::size_t>(up));
    for (std::int64_t ph = 0; ph < up; ++ph) {
      kernel.taps(static_cast<double>(ph) / static_cast<double>(up), table[static_cast<std::size_t>(ph)]);
    }
  }

  const auto x = buffer.samples();
  std::vector<double> out(static_cast<std::size_t>(n_out));
  std::vector<double> scratch;
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t pos = n * down;
    const std::int64_t i0 = pos / up;
    const std::int64_t ph = pos % up;
    const std::vector<double>* taps = nullptr;
    if (tabulate) {
      taps = &table[static_cast<std::size_t>(ph)];
    } else {
      kernel.taps(static_cast<double>(ph) / static_cast<double>(up), scratch);
      taps = &scratch;
    }
    const std::int64_t first = i0 - reach + 1;
    const std::int64_t lo = std::max<std::int64_t>(0, first);
    const std::int64_t hi = std::min<std::int64_t>(n_in, first + 2 * reach);
    double acc = 0.0;
    for (std::int64_t k = lo; k < hi; ++k) acc += x[static_cast<std::size_t>(k)] * (*taps)[static_cast<std::size_t>(k - first)];
    out[static_cast<std::size_t>(n)] = std::clamp(acc, -1.0, 1.0);
  }
  return AudioBuffer(std::move(out), target_rate, buffer.source_bit_depth());
}

// ---------------------------------------------------------------------------
// Noise mixing

double rms(std::span<const double> samples) noexcept {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

MixResult mix_noise(const AudioBuffer& signal, const AudioBuffer& noise, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return MixResult{signal, 0.0, 0};
  if (noise.sample_rate() != signal.sample_rate()) {
    fail(Errc::kRateMismatch, "noise rate " + std::to_string(noise.sample_rate()) +
                                  " differs from signal rate " + std::to_string(signal.sample_rate()));
  }
  const double noise_rms = rms(noise.samples());
  if (!(noise_rms > 0.0)) fail(Errc::kSilentNoise, "noise buffer is silent");
  const double gain = rms(signal.samples()) / noise_rms * std::pow(10.0, -snr_db / 20.0);

  const auto s = signal.samples();
  const auto n = noise.samples();
  std::vector<double> out(s.size());
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s[i] + gain * n[i % n.size()];
    if (v > 1.0 || v < -1.0) ++clipped;
    out[i] = std::clamp(v, -1.0, 1.0);
  }
  return MixResult{AudioBuffer(std::move(out), signal.sample_rate(), signal.source_bit_depth()), gain, clipped};
}

}  // namespace digitrec
