#pragma once

#include <stdexcept>
#include <string>

namespace soar {

enum class ErrorCode {
  UnrecognizedMagic,
  UnsupportedLinkType,
  DstNotInPool,
  ImageMissing,
  AddressInUse,
  ReadinessTimeout,
  StaleHandle,
  EmptyFile,
  SingleClass,
  NonFiniteLoss,
  SchemaMismatch,
  UntrainedModel,
  ConfigInvalid,
  ScriptValidation,
  IoFailure,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnrecognizedMagic: return "UnrecognizedMagic";
    case ErrorCode::UnsupportedLinkType: return "UnsupportedLinkType";
    case ErrorCode::DstNotInPool: return "DstNotInPool";
    case ErrorCode::ImageMissing: return "ImageMissing";
    case ErrorCode::AddressInUse: return "AddressInUse";
    case ErrorCode::ReadinessTimeout: return "ReadinessTimeout";
    case ErrorCode::StaleHandle: return "StaleHandle";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ScriptValidation: return "ScriptValidation";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Error";
}

}  // namespace soar
