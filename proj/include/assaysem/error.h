// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#ifndef ASSAYSEM_ERROR_H_
#define ASSAYSEM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace assaysem {

enum class ErrorCode {
  kIo,
  kEmptyCorpus,
  kInvalidArgument,
  kFormat,
  kFit,
  kMissingEmbedding,
  kConsistency,
  kParse,
  kUnsupportedSource,
  kUnsupported,
  kNotFound,
  kConflict,
  kUnavailable,
};

std::string_view ErrorCodeName(ErrorCode code);

// Library failure tagged with a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace assaysem

#endif  // ASSAYSEM_ERROR_H_
