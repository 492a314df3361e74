#include "digitrec/error.hpp"

namespace digitrec {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kOk: return "Ok";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kIoFailure: return "IoFailure";
    case Errc::kNotPcm: return "NotPcm";
    case Errc::kCorruptHeader: return "CorruptHeader";
    case Errc::kUnsupportedDepth: return "UnsupportedDepth";
    case Errc::kInvalidRate: return "InvalidRate";
    case Errc::kSilentNoise: return "SilentNoise";
    case Errc::kRateMismatch: return "RateMismatch";
    case Errc::kInvalidFftSize: return "InvalidFftSize";
    case Errc::kLagTooLarge: return "LagTooLarge";
    case Errc::kNegativeFrequency: return "NegativeFrequency";
    case Errc::kTooFewBins: return "TooFewBins";
    case Errc::kCorruptFeatureFile: return "CorruptFeatureFile";
    case Errc::kKindMismatch: return "KindMismatch";
    case Errc::kEmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::kDimMismatch: return "DimMismatch";
    case Errc::kSignatureMismatch: return "SignatureMismatch";
    case Errc::kEmptyObservation: return "EmptyObservation";
    case Errc::kNoLegalPath: return "NoLegalPath";
    case Errc::kCorruptModel: return "CorruptModel";
    case Errc::kVersionMismatch: return "VersionMismatch";
    case Errc::kZeroReference: return "ZeroReference";
    case Errc::kEmptyResults: return "EmptyResults";
    case Errc::kEmptyReport: return "EmptyReport";
    case Errc::kConfig: return "ConfigError";
    case Errc::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace digitrec
