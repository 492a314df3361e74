#pragma once

#include <stdexcept>
#include <string>

namespace digitrec {

// Mirrors dr_status in digitrec.h; the numeric values are part of the C ABI.
enum class Errc : int {
  kOk = 0,
  kInvalidArgument = 1,
  kIoFailure = 2,
  kNotPcm = 3,
  kCorruptHeader = 4,
  kUnsupportedDepth = 5,
  kInvalidRate = 6,
  kSilentNoise = 7,
  kRateMismatch = 8,
  kInvalidFftSize = 9,
  kLagTooLarge = 10,
  kNegativeFrequency = 11,
  kTooFewBins = 12,
  kCorruptFeatureFile = 13,
  kKindMismatch = 14,
  kEmptyTrainingSet = 15,
  kDimMismatch = 16,
  kSignatureMismatch = 17,
  kEmptyObservation = 18,
  kNoLegalPath = 19,
  kCorruptModel = 20,
  kVersionMismatch = 21,
  kZeroReference = 22,
  kEmptyResults = 23,
  kEmptyReport = 24,
  kConfig = 25,
  kInternal = 26,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace digitrec
