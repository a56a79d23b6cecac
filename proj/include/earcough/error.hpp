/**
 * Copyright 2026 The earcough Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef EARCOUGH_ERROR_HPP_
#define EARCOUGH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace earcough {

enum class Errc {
  NotStereo,
  UnsupportedEncoding,
  UnsupportedRate,
  MalformedHeader,
  NonIntegerFactor,
  ShiftTooLarge,
  FractionOutOfRange,
  SilentInput,
  ShapeMismatch,
  EmptyNoisePool,
  IoFailure,
  BadMagic,
  CrcMismatch,
  TruncatedFile,
  OverlappingUserSets,
  SingleClassTrainingSet,
  NonFiniteLoss,
  EmptyTestSet,
  RateMismatch,
  OutOfOrderWindow,
  InvalidArgument,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code policy) can branch on the class of error.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::NotStereo: return "NotStereo";
    case Errc::UnsupportedEncoding: return "UnsupportedEncoding";
    case Errc::UnsupportedRate: return "UnsupportedRate";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::NonIntegerFactor: return "NonIntegerFactor";
    case Errc::ShiftTooLarge: return "ShiftTooLarge";
    case Errc::FractionOutOfRange: return "FractionOutOfRange";
    case Errc::SilentInput: return "SilentInput";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyNoisePool: return "EmptyNoisePool";
    case Errc::IoFailure: return "IoFailure";
    case Errc::BadMagic: return "BadMagic";
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::OverlappingUserSets: return "OverlappingUserSets";
    case Errc::SingleClassTrainingSet: return "SingleClassTrainingSet";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::RateMismatch: return "RateMismatch";
    case Errc::OutOfOrderWindow: return "OutOfOrderWindow";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace earcough

#endif  // EARCOUGH_ERROR_HPP_
