#include "digitrec/scoring.hpp"

#include <algorithm>
#include <cctype>

#include "digitrec/error.hpp"

namespace digitrec {

EditCounts align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: distance between ref[0..i) and hyp[0..j)
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i, j - 1) + 1, at(i - 1, j) + 1});
    }
  }
  EditCounts out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++out.substitutions;
      --i;
      --j;
    } else if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++out.insertions;
      --j;
    } else {
      ++out.deletions;
      --i;
    }
  }
  return out;
}

double word_error_rate(std::size_t s, std::size_t d, std::size_t i, std::size_t n) {
  if (n == 0) fail(Errc::kZeroReference, "WER needs at least one reference word");
  return static_cast<double>(s + d + i) / static_cast<double>(n);
}

const std::vector<std::string>& digit_vocabulary() {
  static const std::vector<std::string> vocab = {"one", "two",   "three", "four", "five",
                                                 "six", "seven", "eight", "nine", "zero"};
  return vocab;
}

std::string display_label(const std::string& label) {
  std::string out = label;
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

const DigitResult* EvalReport::find(const std::string& label) const {
  for (const auto& [l, r] : per_digit) {
    if (l == label) return &r;
  }
  return nullptr;
}

EvalReport tabulate(std::span<const Trial> trials, double verdict_threshold,
                    const std::vector<std::string>& vocabulary) {
  if (trials.empty()) fail(Errc::kEmptyResults, "no recognition results to tabulate");
  std::map<std::string, DigitResult> tally;
  EvalReport rep;
  rep.verdict_threshold = verdict_threshold;
  std::size_t correct = 0;
  for (const auto& t : trials) {
    auto& d = tally[t.truth];
    ++d.trials;
    if (t.truth == t.predicted) {
      ++d.correct;
      ++correct;
    } else {
      ++rep.edits.substitutions;
    }
  }
  rep.reference_words = trials.size();
  rep.wer = word_error_rate(rep.edits.substitutions, rep.edits.deletions, rep.edits.insertions, rep.reference_words);
  rep.accuracy_pct = 100.0 * static_cast<double>(correct) / static_cast<double>(trials.size());

  for (const auto& word : vocabulary) {
    if (auto it = tally.find(word); it != tally.end()) {
      rep.per_digit.emplace_back(word, it->second);
      tally.erase(it);
    }
  }
  for (auto& [word, r] : tally) rep.per_digit.emplace_back(word, r);

  std::size_t verdicts = 0;
  for (auto& [word, r] : rep.per_digit) {
    r.verdict_correct = r.rate() >= verdict_threshold;
    if (r.verdict_correct) ++verdicts;
  }
  rep.percentage = 100.0 * static_cast<double>(verdicts) / static_cast<double>(rep.per_digit.size());
  return rep;
}

}  // namespace digitrec
