#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace digitrec {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t total() const noexcept { return substitutions + deletions + insertions; }
  bool operator==(const EditCounts&) const = default;
};

/// Minimum unit-cost edit alignment. Among equal-cost alignments the
/// backtrace prefers substitution, then insertion, then deletion.
EditCounts align(std::span<const std::string> reference, std::span<const std::string> hypothesis);

/// (S + D + I) / N; throws ZeroReference for N = 0. May exceed 1.
double word_error_rate(std::size_t substitutions, std::size_t deletions, std::size_t insertions,
                       std::size_t reference_words);

/// The ten-word vocabulary, in table order ("one" ... "nine", "zero").
const std::vector<std::string>& digit_vocabulary();

/// "one" -> "One".
std::string display_label(const std::string& label);

struct DigitResult {
  std::size_t trials = 0;
  std::size_t correct = 0;
  bool verdict_correct = false;

  double rate() const noexcept { return trials ? static_cast<double>(correct) / static_cast<double>(trials) : 0.0; }
};

struct EvalReport {
  EditCounts edits;
  std::size_t reference_words = 0;
  double wer = 0.0;
  double accuracy_pct = 0.0;     // per-sample
  double percentage = 0.0;       // Correct verdicts over digits, x100
  double verdict_threshold = 0.5;
  std::vector<std::pair<std::string, DigitResult>> per_digit;  // table order

  const DigitResult* find(const std::string& label) const;
};

struct Trial {
  std::string truth;
  std::string predicted;
};

/// Tallies isolated-word trials. A digit's verdict is Correct when its
/// correct-rate reaches the threshold. Digits of `vocabulary` come first in
/// that order; any other labels follow alphabetically.
EvalReport tabulate(std::span<const Trial> trials, double verdict_threshold = 0.5,
                    const std::vector<std::string>& vocabulary = digit_vocabulary());

}  // namespace digitrec
