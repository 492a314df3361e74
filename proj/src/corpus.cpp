#include "digitrec/corpus.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "digitrec/error.hpp"
#include "digitrec/rng.hpp"
#include "digitrec/scoring.hpp"
#include "io_util.hpp"
#include "parallel.hpp"

namespace digitrec {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

const char* split_name(Split split) noexcept { return split == Split::kTrain ? "train" : "test"; }

std::size_t Manifest::count(Split split) const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.split == split ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------------------
// Manifest I/O

std::string manifest_to_jsonl(const Manifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    nlohmann::json j;
    j["path"] = e.path;
    j["label"] = e.label;
    j["speaker"] = e.speaker;
    j["split"] = split_name(e.split);
    j["condition"] = e.condition;
    j["profile"] = manifest.profile.label;
    j["bit_depth"] = manifest.profile.bit_depth;
    j["sample_rate"] = manifest.profile.sample_rate;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  detail::write_file_atomic(path, manifest_to_jsonl(manifest));
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::kIoFailure, "cannot open manifest " + path.string());
  Manifest m;
  m.root = path.parent_path();
  std::string line;
  int lineno = 0;
  bool have_profile = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      ManifestEntry e;
      e.path = j.at("path").get<std::string>();
      e.label = j.at("label").get<std::string>();
      e.speaker = j.value("speaker", std::string());
      const auto split = j.at("split").get<std::string>();
      if (split == "train") e.split = Split::kTrain;
      else if (split == "test") e.split = Split::kTest;
      else fail(Errc::kConfig, where + "split must be train or test");
      e.condition = j.value("condition", std::string("clean"));
      if (!have_profile && j.contains("profile")) {
        m.profile.label = j.at("profile").get<std::string>();
        m.profile.bit_depth = j.value("bit_depth", 16);
        m.profile.sample_rate = j.value("sample_rate", 16000);
        have_profile = true;
      }
      m.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      fail(Errc::kConfig, where + ex.what());
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Synthetic digits

namespace {

struct Formants {
  std::array<double, 3> f;
};

// Four anchor points per word, each three formant frequencies in Hz. All
// content stays below 3.2 kHz so it survives the 8 kHz profile.
const std::map<std::string, std::array<Formants, 4>>& digit_anchors() {
  static const std::map<std::string, std::array<Formants, 4>> table = {
      {"one", {{{{300, 700, 2400}}, {{450, 800, 2400}}, {{600, 900, 2400}}, {{450, 850, 2400}}}}},
      {"two", {{{{300, 2100, 2800}}, {{320, 2000, 2800}}, {{300, 1900, 2700}}, {{300, 1800, 2700}}}}},
      {"three", {{{{500, 1600, 2900}}, {{400, 1900, 2900}}, {{300, 2300, 3000}}, {{280, 2400, 3000}}}}},
      {"four", {{{{350, 750, 2300}}, {{550, 850, 2400}}, {{600, 950, 2000}}, {{500, 1300, 2200}}}}},
      {"five", {{{{400, 1200, 2500}}, {{750, 1200, 2500}}, {{600, 1800, 2600}}, {{400, 2200, 2700}}}}},
      {"six", {{{{450, 1800, 2600}}, {{350, 2200, 2800}}, {{600, 1700, 2500}}, {{250, 2500, 3000}}}}},
      {"seven", {{{{500, 1700, 2600}}, {{650, 1800, 2600}}, {{450, 1300, 2400}}, {{350, 1500, 2500}}}}},
      {"eight", {{{{700, 1800, 2600}}, {{450, 2100, 2700}}, {{300, 2300, 2900}}, {{320, 2200, 2900}}}}},
      {"nine", {{{{300, 1400, 2400}}, {{700, 1200, 2500}}, {{500, 2000, 2600}}, {{300, 1700, 2500}}}}},
      {"zero", {{{{350, 1700, 2700}}, {{450, 1500, 2500}}, {{500, 1000, 2400}}, {{400, 800, 2300}}}}},
  };
  return table;
}

constexpr std::array<double, 3> kBandwidth = {90.0, 110.0, 160.0};  // Hz
constexpr double kBaseDuration = 0.40;   // seconds of voiced content
constexpr double kRampSeconds = 0.02;
constexpr double kBreathLevel = 0.002;

// Two-pole resonator with unity gain at DC.
struct Resonator {
  double y1 = 0.0, y2 = 0.0;
  double step(double x, double freq, double bandwidth, int rate) {
    const double r = std::exp(-kPi * bandwidth / rate);
    const double b = 2.0 * r * std::cos(2.0 * kPi * freq / rate);
    const double c = -r * r;
    const double y = (1.0 - b - c) * x + b * y1 + c * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

// Source-filter synthesis: a pulse train at the speaker's pitch, shaped by a
// glottal low-pass, three cascaded formant resonators and a radiation
// difference.
AudioBuffer synthesize_digit(const std::string& label, const SynthSpec& spec, std::size_t speaker,
                             std::uint64_t token_seed) {
  const auto& table = digit_anchors();
  const auto it = table.find(label);
  if (it == table.end()) fail(Errc::kInvalidArgument, "no synthetic pattern for '" + label + "'");
  const auto& anchors = it->second;
  const int rate = spec.base_profile.sample_rate;
  Rng rng(token_seed);

  const std::size_t speakers = std::max<std::size_t>(1, spec.speakers);
  const double speaker_pos =
      speakers == 1 ? 0.5 : static_cast<double>(speaker % speakers) / static_cast<double>(speakers - 1);
  const double speaker_scale = 0.94 + 0.12 * speaker_pos;
  const double freq_scale = speaker_scale * (1.0 + rng.uniform(-spec.jitter.frequency, spec.jitter.frequency));
  const double duration = kBaseDuration * (1.0 + rng.uniform(-spec.jitter.duration, spec.jitter.duration));
  const double peak = 0.4 * (1.0 + rng.uniform(-spec.jitter.amplitude, spec.jitter.amplitude));
  const double lead = rng.uniform(0.03, 0.08);
  const double tail = rng.uniform(0.03, 0.08);
  const double f0 = (100.0 + 80.0 * speaker_pos) * (1.0 + rng.uniform(-0.05, 0.05));
  std::array<double, 4> knots = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  knots[1] += rng.uniform(-0.05, 0.05);
  knots[2] += rng.uniform(-0.05, 0.05);
  std::array<double, 3> bandwidth{};
  for (std::size_t k = 0; k < 3; ++k) bandwidth[k] = kBandwidth[k] * (1.0 + rng.uniform(-0.2, 0.2));

  const auto voiced = static_cast<std::size_t>(std::lround(duration * rate));
  const auto lead_n = static_cast<std::size_t>(std::lround(lead * rate));
  const auto tail_n = static_cast<std::size_t>(std::lround(tail * rate));
  std::vector<double> wave(voiced, 0.0);
  const double glottal = std::exp(-2.0 * kPi * 100.0 / rate);
  double g1 = 0.0, g2 = 0.0, prev = 0.0;
  double pitch_phase = 1.0;
  std::array<Resonator, 3> res{};
  double max_abs = 0.0;
  for (std::size_t n = 0; n < voiced; ++n) {
    const double u = static_cast<double>(n) / static_cast<double>(voiced);
    std::size_t seg = 0;
    while (seg < 2 && u > knots[seg + 1]) ++seg;
    const double w = (u - knots[seg]) / (knots[seg + 1] - knots[seg]);
    // Pitch falls by a fifth over the word.
    pitch_phase += f0 * (1.1 - 0.2 * u) / rate;
    double x = 0.0;
    if (pitch_phase >= 1.0) {
      pitch_phase -= 1.0;
      x = 1.0;
    }
    const double g = x + 2.0 * glottal * g1 - glottal * glottal * g2;
    g2 = g1;
    g1 = g;
    double v = g;
    for (std::size_t k = 0; k < 3; ++k) {
      const double f = freq_scale * ((1.0 - w) * anchors[seg].f[k] + w * anchors[seg + 1].f[k]);
      v = res[k].step(v, f, bandwidth[k], rate);
    }
    wave[n] = v - prev;
    prev = v;
    max_abs = std::max(max_abs, std::abs(wave[n]));
  }

  std::vector<double> out(lead_n + voiced + tail_n, 0.0);
  const double ramp = kRampSeconds * rate;
  const double gain = max_abs > 0.0 ? peak / max_abs : 0.0;
  for (std::size_t n = 0; n < voiced; ++n) {
    double env = 1.0;
    const double from_start = static_cast<double>(n);
    const double to_end = static_cast<double>(voiced - 1 - n);
    if (from_start < ramp) env = 0.5 - 0.5 * std::cos(kPi * from_start / ramp);
    if (to_end < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(kPi * to_end / ramp));
    out[lead_n + n] = gain * env * wave[n];
  }
  for (double& s : out) s = std::clamp(s + kBreathLevel * rng.uniform(-1.0, 1.0), -1.0, 1.0);
  return requantize(AudioBuffer(std::move(out), rate, spec.base_profile.bit_depth), spec.base_profile.bit_depth);
}

namespace {

std::string token_name(Split split, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%03zu.wav", split_name(split), index);
  return buf;
}

}  // namespace

std::vector<CorpusItem> synthesize_corpus(const SynthSpec& spec) {
  std::vector<CorpusItem> items;
  const std::string profile = spec.base_profile.label;
  for (Split split : {Split::kTrain, Split::kTest}) {
    const std::size_t count = split == Split::kTrain ? spec.train_per_digit : spec.test_per_digit;
    for (const auto& digit : digit_vocabulary()) {
      for (std::size_t i = 0; i < count; ++i) {
        ManifestEntry e;
        e.path = "clean/" + profile + "/" + digit + "/" + token_name(split, i);
        e.label = digit;
        const std::size_t speaker = i % std::max<std::size_t>(1, spec.speakers);
        e.speaker = "spk" + std::to_string(speaker);
        e.split = split;
        e.condition = "clean";
        const auto seed = mix_seed(spec.seed, detail::fnv1a(e.path));
        items.push_back({e, synthesize_digit(digit, spec, speaker, seed)});
      }
    }
  }
  return items;
}

Manifest generate_synthetic_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  check_bit_depth(spec.base_profile.bit_depth);
  auto items = synthesize_corpus(spec);
  Manifest m;
  m.profile = spec.base_profile;
  m.root = out_dir;
  for (auto& item : items) {
    write_wav(item.audio, spec.base_profile.bit_depth, out_dir / item.entry.path);
    m.entries.push_back(std::move(item.entry));
  }
  write_manifest(m, out_dir / "manifest.jsonl");
  return m;
}

// ---------------------------------------------------------------------------
// Noise and degradation

AudioBuffer builtin_noise(NoiseKind kind, std::size_t num_samples, int sample_rate, std::uint64_t seed) {
  if (sample_rate <= 0) fail(Errc::kInvalidRate, "sample rate must be positive");
  std::vector<double> out(num_samples, 0.0);
  if (kind == NoiseKind::kClean || num_samples == 0) return AudioBuffer(std::move(out), sample_rate, 24);
  Rng rng(seed);
  if (kind == NoiseKind::kRandom) {
    for (double& s : out) s = rng.uniform(-1.0, 1.0);
  } else {
    const double a = std::exp(-2.0 * kPi * 300.0 / sample_rate);
    double y1 = 0.0, y2 = 0.0;
    const auto warmup = static_cast<std::size_t>(sample_rate / 10);
    for (std::size_t n = 0; n < warmup + num_samples; ++n) {
      y1 = a * y1 + (1.0 - a) * rng.normal();
      y2 = a * y2 + (1.0 - a) * y1;
      if (n >= warmup) out[n - warmup] = y2;
    }
  }
  const double level = rms(out);
  if (level > 0.0) {
    for (double& s : out) s = std::clamp(s * kBuiltinNoiseRms / level, -1.0, 1.0);
  }
  return AudioBuffer(std::move(out), sample_rate, 24);
}

std::uint64_t utterance_seed(std::uint64_t seed, const std::string& path) {
  return mix_seed(seed, detail::fnv1a(path));
}

AudioBuffer degrade_audio(const AudioBuffer& clean, const EncodingProfile& profile, const NoiseCondition& condition,
                          std::uint64_t seed, const AudioBuffer* noise) {
  check_bit_depth(profile.bit_depth);
  auto audio = resample(clean, profile.sample_rate);
  if (condition.kind != NoiseKind::kClean && !(std::isinf(condition.snr_db) && condition.snr_db > 0)) {
    AudioBuffer n;
    if (noise != nullptr && !noise->empty()) {
      n = resample(*noise, profile.sample_rate);
    } else {
      n = builtin_noise(condition.kind, std::max<std::size_t>(audio.size(), 1), profile.sample_rate, seed);
    }
    audio = mix_noise(audio, n, condition.snr_db).audio;
  }
  return requantize(audio, profile.bit_depth);
}

Manifest degrade_corpus(const Manifest& manifest, const EncodingProfile& profile, const NoiseCondition& condition,
                        const std::filesystem::path& out_dir, std::uint64_t seed, unsigned threads) {
  check_bit_depth(profile.bit_depth);
  std::optional<AudioBuffer> noise;
  if (!condition.noise_wav.empty()) noise = read_wav(condition.noise_wav);
  const std::string cond = noise_kind_name(condition.kind);

  Manifest out;
  out.profile = profile;
  out.root = out_dir;
  out.entries.resize(manifest.entries.size());
  detail::parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
    const auto& src = manifest.entries[i];
    ManifestEntry e = src;
    e.condition = cond;
    e.path = cond + "/" + profile.label + "/" + src.label + "/" + std::filesystem::path(src.path).filename().string();
    const auto clean = read_wav(manifest.resolve(src));
    const auto degraded = degrade_audio(clean, profile, condition, utterance_seed(seed, src.path),
                                        noise ? &*noise : nullptr);
    write_wav(degraded, profile.bit_depth, out_dir / e.path);
    out.entries[i] = std::move(e);
  });
  write_manifest(out, out_dir / "manifest.jsonl");
  return out;
}

}  // namespace digitrec
