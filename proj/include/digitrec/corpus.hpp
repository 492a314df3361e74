#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "digitrec/audio.hpp"

namespace digitrec {

enum class Split { kTrain, kTest };

const char* split_name(Split split) noexcept;

struct ManifestEntry {
  std::string path;  // relative to the manifest's directory
  std::string label;
  std::string speaker;
  Split split = Split::kTrain;
  std::string condition = "clean";

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  EncodingProfile profile;
  /// Directory that entry paths are relative to.
  std::filesystem::path root;

  std::filesystem::path resolve(const ManifestEntry& e) const { return root / e.path; }
  std::size_t count(Split split) const;
};

/// JSON-lines; each line also records the profile of the audio it names.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
std::string manifest_to_jsonl(const Manifest& manifest);

struct Jitter {
  double frequency = 0.03;  // relative, per token
  double duration = 0.15;   // relative, per token
  double amplitude = 0.4;   // relative spread of the peak level
};

struct SynthSpec {
  std::uint64_t seed = 1234;
  std::size_t train_per_digit = 20;
  std::size_t test_per_digit = 10;
  std::size_t speakers = 4;
  EncodingProfile base_profile{"pcm24-48k", 24, 48000, "High Resolution Audio (DVD)"};
  Jitter jitter;
};

/// One token of a digit: a pitch pulse train through three formant
/// resonators gliding between per-word anchor frequencies, with seeded
/// speaker and token perturbations, stored at the base profile.
AudioBuffer synthesize_digit(const std::string& label, const SynthSpec& spec, std::size_t speaker,
                             std::uint64_t token_seed);

struct CorpusItem {
  ManifestEntry entry;
  AudioBuffer audio;
};

/// The whole synthetic corpus in memory, in manifest order.
std::vector<CorpusItem> synthesize_corpus(const SynthSpec& spec);

/// Writes <out>/clean/<profile>/<digit>/<split>-NNN.wav and
/// <out>/manifest.jsonl.
Manifest generate_synthetic_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// Seeded stand-in noise. Random is uniform white noise; Fan is white noise
/// through two cascaded one-pole low-passes at 300 Hz. Both are scaled to
/// kBuiltinNoiseRms so they fit the sample range.
AudioBuffer builtin_noise(NoiseKind kind, std::size_t num_samples, int sample_rate, std::uint64_t seed);
constexpr double kBuiltinNoiseRms = 0.2;

/// Resample to the profile rate, mix the condition's noise, requantize.
/// `noise`, when non-empty, is resampled to the profile rate and used
/// instead of builtin_noise(seed).
AudioBuffer degrade_audio(const AudioBuffer& clean, const EncodingProfile& profile, const NoiseCondition& condition,
                          std::uint64_t seed, const AudioBuffer* noise = nullptr);

/// Per-utterance noise seed; depends only on the base seed and the path.
std::uint64_t utterance_seed(std::uint64_t seed, const std::string& path);

/// Writes <out>/<condition>/<profile>/<digit>/<file> and <out>/manifest.jsonl.
Manifest degrade_corpus(const Manifest& manifest, const EncodingProfile& profile, const NoiseCondition& condition,
                        const std::filesystem::path& out_dir, std::uint64_t seed, unsigned threads = 1);

}  // namespace digitrec
