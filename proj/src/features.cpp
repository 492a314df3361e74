#include "digitrec/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "digitrec/error.hpp"
#include "io_util.hpp"

namespace digitrec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* feature_kind_name(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kLpc: return "lpc";
    case FeatureKind::kPlp: return "plp";
    case FeatureKind::kFbank: return "fbank";
    case FeatureKind::kMelspec: return "melspec";
  }
  return "?";
}

const char* feature_kind_display(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::kMfcc: return "MFCC";
    case FeatureKind::kLpc: return "LPC";
    case FeatureKind::kPlp: return "PLP";
    case FeatureKind::kFbank: return "FBANK";
    case FeatureKind::kMelspec: return "MELSPEC";
  }
  return "?";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) noexcept {
  for (FeatureKind k : all_feature_kinds()) {
    if (name == feature_kind_name(k) || name == feature_kind_display(k)) return k;
  }
  return std::nullopt;
}

std::optional<FeatureKind> feature_kind_from_tag(std::uint8_t tag) noexcept {
  if (tag >= 1 && tag <= 5) return static_cast<FeatureKind>(tag);
  return std::nullopt;
}

const std::vector<FeatureKind>& all_feature_kinds() {
  static const std::vector<FeatureKind> kinds = {FeatureKind::kMfcc, FeatureKind::kLpc, FeatureKind::kPlp,
                                                 FeatureKind::kFbank, FeatureKind::kMelspec};
  return kinds;
}

void FeatureConfig::validate() const {
  auto bad = [](const std::string& what) { fail(Errc::kInvalidArgument, "feature config: " + what); };
  if (num_filters < 2) bad("num_filters must be >= 2");
  if (num_ceps < 1) bad("num_ceps must be >= 1");
  if ((kind == FeatureKind::kMfcc || kind == FeatureKind::kPlp) && num_ceps > num_filters) {
    bad("num_ceps must not exceed num_filters");
  }
  if (lpc_order < 1) bad("lpc_order must be >= 1");
  if (kind == FeatureKind::kPlp && lpc_order > num_filters) bad("PLP order must not exceed band count");
  if (include_deltas < 0 || include_deltas > 2) bad("include_deltas must be 0, 1 or 2");
  if (delta_window < 1) bad("delta_window must be >= 1");
  if (!(energy_floor > 0.0)) bad("energy_floor must be positive");
}

int FeatureConfig::base_dim() const {
  switch (kind) {
    case FeatureKind::kMfcc: return num_ceps + 1;
    case FeatureKind::kLpc: return lpc_order;
    case FeatureKind::kPlp: return num_ceps;
    case FeatureKind::kFbank:
    case FeatureKind::kMelspec: return num_filters;
  }
  return 0;
}

FeatureMatrix::FeatureMatrix(FeatureKind kind, std::size_t dim, std::uint32_t frame_shift_us)
    : kind_(kind), dim_(dim), frame_shift_us_(frame_shift_us) {
  config_.kind = kind;
}

void FeatureMatrix::append_row(std::span<const double> row) {
  if (row.size() != dim_) fail(Errc::kDimMismatch, "feature row has wrong dimension");
  data_.insert(data_.end(), row.begin(), row.end());
}

FeatureSignature FeatureMatrix::signature() const {
  // Only what survives a round-trip through a feature file takes part.
  const std::string canon = std::string("kind=") + feature_kind_name(kind_) + ";dim=" + std::to_string(dim_) +
                            ";shift_us=" + std::to_string(frame_shift_us_);
  return FeatureSignature{kind_, static_cast<std::uint32_t>(dim_), detail::fnv1a(canon)};
}

// ---------------------------------------------------------------------------
// Mel filterbank

double mel_scale(double freq_hz) {
  if (freq_hz < 0.0) fail(Errc::kNegativeFrequency, "negative frequency");
  return 2595.0 * std::log10(1.0 + freq_hz / 700.0);
}

double inverse_mel_scale(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int sample_rate, std::size_t fft_size, int num_filters) {
  if (num_filters < 2) fail(Errc::kInvalidArgument, "need at least two mel filters");
  num_bins_ = fft_size / 2 + 1;
  const double nyquist = sample_rate / 2.0;
  const double mel_max = mel_scale(nyquist);
  std::vector<double> edges(static_cast<std::size_t>(num_filters) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = inverse_mel_scale(mel_max * static_cast<double>(i) / static_cast<double>(num_filters + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
  for (int j = 0; j < num_filters; ++j) {
    const double lo = edges[static_cast<std::size_t>(j)];
    const double mid = edges[static_cast<std::size_t>(j) + 1];
    const double hi = edges[static_cast<std::size_t>(j) + 2];
    std::size_t first = num_bins_;
    std::vector<double> w;
    for (std::size_t k = 0; k < num_bins_; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double v = 0.0;
      if (f > lo && f <= mid) v = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) v = (hi - f) / (hi - mid);
      if (v > 0.0) {
        if (first == num_bins_) first = k;
        w.resize(k - first + 1, 0.0);
        w[k - first] = v;
      }
    }
    if (w.empty()) {
      fail(Errc::kTooFewBins, "FFT resolution too coarse for " + std::to_string(num_filters) + " mel filters");
    }
    first_bin_.push_back(first);
    weights_.push_back(std::move(w));
    centers_hz_.push_back(mid);
  }
}

std::vector<double> MelFilterbank::apply(std::span<const double> power) const {
  if (power.size() != num_bins_) fail(Errc::kInvalidArgument, "spectrum length does not match filterbank");
  std::vector<double> out(first_bin_.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    const auto& w = weights_[j];
    for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * power[first_bin_[j] + i];
    out[j] = acc;
  }
  return out;
}

double MelFilterbank::area(int filter) const {
  double acc = 0.0;
  for (double v : weights_[static_cast<std::size_t>(filter)]) acc += v;
  return acc;
}

std::vector<double> mel_filterbank(std::span<const double> power, int sample_rate, int num_filters) {
  if (power.size() < 2) fail(Errc::kTooFewBins, "spectrum too short");
  const MelFilterbank bank(sample_rate, 2 * (power.size() - 1), num_filters);
  return bank.apply(power);
}

std::vector<double> dct_ii(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::cos(kPi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) /
                             (2.0 * static_cast<double>(n)));
    }
    out[k] = (k == 0 ? s0 : sk) * acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear prediction

LpcResult levinson_durbin(std::span<const double> r, double floor) {
  if (r.empty()) fail(Errc::kInvalidArgument, "empty autocorrelation");
  const std::size_t p = r.size() - 1;
  LpcResult res;
  res.coeffs.assign(p, 0.0);
  res.reflection.assign(p, 0.0);
  res.error = r[0];
  if (!(r[0] > floor) || !std::isfinite(r[0])) {
    res.degenerate = true;
    return res;
  }
  std::vector<double> a(p + 1, 0.0), prev(p + 1, 0.0);
  a[0] = 1.0;
  double err = r[0];
  for (std::size_t i = 1; i <= p; ++i) {
    double acc = r[i];
    for (std::size_t j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (std::size_t j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    res.reflection[i - 1] = k;
    err *= (1.0 - k * k);
    // A numerically singular Toeplitz system: keep the lower-order solution.
    if (!(err > r[0] * 1e-14)) {
      err = std::max(err, 0.0);
      break;
    }
  }
  for (std::size_t i = 1; i <= p; ++i) res.coeffs[i - 1] = a[i];
  res.error = err;
  return res;
}

std::vector<double> lpc_to_cepstrum(std::span<const double> a, int n) {
  const auto p = static_cast<int>(a.size());
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  for (int m = 1; m <= n; ++m) {
    double acc = m <= p ? -a[static_cast<std::size_t>(m - 1)] : 0.0;
    for (int k = 1; k < m; ++k) {
      const int idx = m - k;
      if (idx <= p) acc -= (static_cast<double>(k) / m) * c[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(idx - 1)];
    }
    c[static_cast<std::size_t>(m)] = acc;
  }
  return {c.begin() + 1, c.end()};
}

double bark_scale(double freq_hz) { return 6.0 * std::asinh(freq_hz / 600.0); }

double equal_loudness(double freq_hz) {
  const double w2 = std::pow(2.0 * kPi * freq_hz, 2);
  return (w2 + 56.8e6) * w2 * w2 / (std::pow(w2 + 6.3e6, 2) * (w2 + 0.38e9));
}

namespace {

// Critical-band masking curve over a bark offset.
double critical_band(double d) {
  if (d < -1.3 || d > 2.5) return 0.0;
  if (d < -0.5) return std::pow(10.0, 2.5 * (d + 0.5));
  if (d <= 0.5) return 1.0;
  return std::pow(10.0, -(d - 0.5));
}

class BarkFilterbank {
 public:
  BarkFilterbank(int sample_rate, std::size_t fft_size, int bands) {
    const std::size_t bins = fft_size / 2 + 1;
    const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
    const double bark_max = bark_scale(sample_rate / 2.0);
    for (int j = 1; j <= bands; ++j) {
      const double centre = bark_max * j / (bands + 1);
      std::vector<double> w(bins, 0.0);
      double total = 0.0;
      for (std::size_t k = 0; k < bins; ++k) {
        w[k] = critical_band(bark_scale(static_cast<double>(k) * bin_hz) - centre);
        total += w[k];
      }
      if (!(total > 0.0)) fail(Errc::kTooFewBins, "FFT resolution too coarse for PLP bands");
      weights_.push_back(std::move(w));
      loudness_.push_back(equal_loudness(600.0 * std::sinh(centre / 6.0)));
    }
  }

  // Band energies after equal-loudness weighting.
  std::vector<double> apply(std::span<const double> power) const {
    std::vector<double> out(weights_.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) acc += weights_[j][k] * power[k];
      out[j] = acc * loudness_[j];
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> weights_;
  std::vector<double> loudness_;
};

// Autocorrelation of an even power spectrum sampled at M equally spaced
// points on [0, pi], via the inverse DFT of length 2(M-1).
std::vector<double> spectrum_autocorrelation(std::span<const double> p, int max_lag) {
  const std::size_t m = p.size();
  const double denom = static_cast<double>(m - 1);
  std::vector<double> r(static_cast<std::size_t>(max_lag) + 1);
  for (int k = 0; k <= max_lag; ++k) {
    double acc = p[0] + ((k % 2) ? -p[m - 1] : p[m - 1]);
    for (std::size_t j = 1; j + 1 < m; ++j) acc += 2.0 * p[j] * std::cos(kPi * k * static_cast<double>(j) / denom);
    r[static_cast<std::size_t>(k)] = acc / (2.0 * denom);
  }
  return r;
}

std::uint32_t shift_us(const FrameMatrix& frames) {
  return static_cast<std::uint32_t>(std::lround(frames.config().frame_shift_ms * 1000.0));
}

template <typename RowFn>
FeatureMatrix build(const FrameMatrix& frames, const FeatureConfig& config, RowFn&& row_fn) {
  config.validate();
  FeatureConfig static_config = config;
  static_config.include_deltas = 0;
  FeatureMatrix out(config.kind, static_cast<std::size_t>(static_config.base_dim()), shift_us(frames));
  out.set_config(static_config);
  for (std::size_t t = 0; t < frames.num_frames(); ++t) out.append_row(row_fn(frames.frame(t)));
  return out;
}

std::size_t fft_size_for(const FrameMatrix& frames) { return next_pow2(frames.frame_length()); }

std::vector<double> floored_log(std::span<const double> energies, double floor) {
  std::vector<double> out(energies.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(std::max(energies[i], floor));
  return out;
}

}  // namespace

FeatureMatrix extract_melspec(const FrameMatrix& frames, const FeatureConfig& config) {
  const std::size_t n = fft_size_for(frames);
  const MelFilterbank bank(frames.sample_rate(), n, config.num_filters);
  auto cfg = config;
  cfg.kind = FeatureKind::kMelspec;
  return build(frames, cfg, [&](std::span<const double> f) { return bank.apply(power_spectrum(f, n)); });
}

FeatureMatrix extract_fbank(const FrameMatrix& frames, const FeatureConfig& config) {
  const std::size_t n = fft_size_for(frames);
  const MelFilterbank bank(frames.sample_rate(), n, config.num_filters);
  auto cfg = config;
  cfg.kind = FeatureKind::kFbank;
  return build(frames, cfg, [&](std::span<const double> f) {
    return floored_log(bank.apply(power_spectrum(f, n)), config.energy_floor);
  });
}

FeatureMatrix extract_mfcc(const FrameMatrix& frames, const FeatureConfig& config) {
  const std::size_t n = fft_size_for(frames);
  const MelFilterbank bank(frames.sample_rate(), n, config.num_filters);
  auto cfg = config;
  cfg.kind = FeatureKind::kMfcc;
  return build(frames, cfg, [&](std::span<const double> f) {
    const auto logmel = floored_log(bank.apply(power_spectrum(f, n)), config.energy_floor);
    const auto cep = dct_ii(logmel);
    std::vector<double> row(static_cast<std::size_t>(config.num_ceps) + 1);
    if (config.use_energy) {
      double energy = 0.0;
      for (double s : f) energy += s * s;
      row[0] = std::log(std::max(energy, config.energy_floor));
    } else {
      row[0] = cep[0];
    }
    for (int i = 1; i <= config.num_ceps; ++i) row[static_cast<std::size_t>(i)] = cep[static_cast<std::size_t>(i)];
    return row;
  });
}

FeatureMatrix extract_lpc(const FrameMatrix& frames, const FeatureConfig& config) {
  if (static_cast<std::size_t>(config.lpc_order) >= frames.frame_length() && frames.num_frames() > 0) {
    fail(Errc::kInvalidArgument, "LPC order must be below the frame length");
  }
  auto cfg = config;
  cfg.kind = FeatureKind::kLpc;
  return build(frames, cfg, [&](std::span<const double> f) {
    const auto r = autocorrelation(f, static_cast<std::size_t>(config.lpc_order));
    return levinson_durbin(r, config.energy_floor).coeffs;
  });
}

FeatureMatrix extract_plp(const FrameMatrix& frames, const FeatureConfig& config) {
  const std::size_t n = fft_size_for(frames);
  const BarkFilterbank bank(frames.sample_rate(), n, config.num_filters);
  auto cfg = config;
  cfg.kind = FeatureKind::kPlp;
  return build(frames, cfg, [&](std::span<const double> f) {
    const auto bands = bank.apply(power_spectrum(f, n));
    // Edge bands are duplicated so the curve spans DC to Nyquist.
    std::vector<double> curve(bands.size() + 2);
    for (std::size_t j = 0; j < bands.size(); ++j) {
      curve[j + 1] = loudness_compress(std::max(bands[j], config.energy_floor));
    }
    curve.front() = curve[1];
    curve.back() = curve[bands.size()];
    const auto r = spectrum_autocorrelation(curve, config.lpc_order);
    const auto lpc = levinson_durbin(r, 0.0);
    return lpc_to_cepstrum(lpc.coeffs, config.num_ceps);
  });
}

FeatureMatrix extract_static(const FrameMatrix& frames, const FeatureConfig& config) {
  switch (config.kind) {
    case FeatureKind::kMfcc: return extract_mfcc(frames, config);
    case FeatureKind::kLpc: return extract_lpc(frames, config);
    case FeatureKind::kPlp: return extract_plp(frames, config);
    case FeatureKind::kFbank: return extract_fbank(frames, config);
    case FeatureKind::kMelspec: return extract_melspec(frames, config);
  }
  fail(Errc::kInvalidArgument, "unknown feature kind");
}

FeatureMatrix append_deltas(const FeatureMatrix& features, int order, int delta_window) {
  if (order < 1 || order > 2) fail(Errc::kInvalidArgument, "delta order must be 1 or 2");
  if (delta_window < 1) fail(Errc::kInvalidArgument, "delta window must be >= 1");
  const std::size_t frames = features.num_frames();
  if (frames == 0) fail(Errc::kEmptyObservation, "cannot take deltas of an empty matrix");
  const std::size_t d = features.dim();
  double norm = 0.0;
  for (int w = 1; w <= delta_window; ++w) norm += static_cast<double>(w) * w;
  norm *= 2.0;

  // streams[0] static, streams[1] delta, streams[2] delta-delta
  std::vector<std::vector<double>> streams(static_cast<std::size_t>(order) + 1,
                                           std::vector<double>(frames * d));
  std::copy(features.values().begin(), features.values().end(), streams[0].begin());
  const auto last = static_cast<std::ptrdiff_t>(frames) - 1;
  for (int o = 1; o <= order; ++o) {
    const auto& src = streams[static_cast<std::size_t>(o) - 1];
    auto& dst = streams[static_cast<std::size_t>(o)];
    for (std::ptrdiff_t t = 0; t <= last; ++t) {
      for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int w = 1; w <= delta_window; ++w) {
          const auto ahead = static_cast<std::size_t>(std::min<std::ptrdiff_t>(t + w, last));
          const auto behind = static_cast<std::size_t>(std::max<std::ptrdiff_t>(t - w, 0));
          acc += w * (src[ahead * d + i] - src[behind * d + i]);
        }
        dst[static_cast<std::size_t>(t) * d + i] = acc / norm;
      }
    }
  }

  FeatureMatrix out(features.kind(), d * (static_cast<std::size_t>(order) + 1), features.frame_shift_us());
  auto cfg = features.config();
  cfg.include_deltas = order;
  cfg.delta_window = delta_window;
  out.set_config(cfg);
  std::vector<double> row(out.dim());
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t s = 0; s < streams.size(); ++s) {
      std::copy_n(streams[s].begin() + static_cast<std::ptrdiff_t>(t * d), d,
                  row.begin() + static_cast<std::ptrdiff_t>(s * d));
    }
    out.append_row(row);
  }
  return out;
}

FeatureMatrix extract(const AudioBuffer& audio, const FrameConfig& frame_config, const FeatureConfig& config) {
  config.validate();
  const auto frames = analyze(audio, frame_config);
  auto stat = extract_static(frames, config);
  if (config.include_deltas == 0 || stat.num_frames() == 0) {
    if (config.include_deltas != 0) {
      // No frames: keep the declared dimension so signatures stay consistent.
      FeatureMatrix empty(config.kind, static_cast<std::size_t>(config.dim()), stat.frame_shift_us());
      empty.set_config(config);
      return empty;
    }
    stat.set_config(config);
    return stat;
  }
  auto out = append_deltas(stat, config.include_deltas, config.delta_window);
  out.set_config(config);
  return out;
}

// ---------------------------------------------------------------------------
// Feature files

namespace {
constexpr char kFeatureMagic[4] = {'D', 'F', 'E', '1'};
}

std::vector<std::uint8_t> encode_features(const FeatureMatrix& features) {
  std::vector<std::uint8_t> out;
  out.reserve(17 + features.values().size() * 4);
  detail::ByteWriter w(out);
  w.bytes(kFeatureMagic, 4);
  w.u8(static_cast<std::uint8_t>(features.kind()));
  w.u32(static_cast<std::uint32_t>(features.dim()));
  w.u32(static_cast<std::uint32_t>(features.num_frames()));
  w.u32(features.frame_shift_us());
  for (double v : features.values()) w.f32(static_cast<float>(v));
  return out;
}

FeatureMatrix decode_features(const std::vector<std::uint8_t>& bytes, std::optional<FeatureKind> expected) {
  detail::ByteReader r(bytes, Errc::kCorruptFeatureFile);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) fail(Errc::kCorruptFeatureFile, "bad feature file magic");
  const auto kind = feature_kind_from_tag(r.u8());
  if (!kind) fail(Errc::kCorruptFeatureFile, "unknown feature kind tag");
  if (expected && *expected != *kind) {
    fail(Errc::kKindMismatch, std::string("expected ") + feature_kind_name(*expected) + " features, found " +
                                  feature_kind_name(*kind));
  }
  const std::uint32_t dim = r.u32();
  const std::uint32_t frames = r.u32();
  const std::uint32_t shift = r.u32();
  if (dim == 0 && frames != 0) fail(Errc::kCorruptFeatureFile, "zero dimension");
  const std::uint64_t count = static_cast<std::uint64_t>(dim) * frames;
  if (r.remaining() != count * 4) fail(Errc::kCorruptFeatureFile, "payload size does not match header");
  FeatureMatrix out(*kind, dim, shift);
  std::vector<double> row(dim);
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (auto& v : row) v = r.f32();
    out.append_row(row);
  }
  return out;
}

void write_features(const FeatureMatrix& features, const std::filesystem::path& path) {
  const auto bytes = encode_features(features);
  detail::write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

FeatureMatrix read_features(const std::filesystem::path& path, std::optional<FeatureKind> expected) {
  return decode_features(detail::read_file(path), expected);
}

}  // namespace digitrec
