// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "assaysem/error.h"

namespace assaysem {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kEmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kFormat: return "FORMAT";
    case ErrorCode::kFit: return "FIT";
    case ErrorCode::kMissingEmbedding: return "MISSING_EMBEDDING";
    case ErrorCode::kConsistency: return "CONSISTENCY";
    case ErrorCode::kParse: return "PARSE";
    case ErrorCode::kUnsupportedSource: return "UNSUPPORTED_SOURCE";
    case ErrorCode::kUnsupported: return "UNSUPPORTED";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kConflict: return "CONFLICT";
    case ErrorCode::kUnavailable: return "UNAVAILABLE";
  }
  return "UNKNOWN";
}

}  // namespace assaysem
