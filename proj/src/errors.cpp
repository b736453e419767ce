#include "salprop/errors.hpp"

namespace salprop {

const char* err_name(Err code) {
  switch (code) {
    case Err::FileNotFound: return "FileNotFound";
    case Err::DecodeError: return "DecodeError";
    case Err::TooSmall: return "TooSmall";
    case Err::BadMagic: return "BadMagic";
    case Err::Truncated: return "Truncated";
    case Err::BadValue: return "BadValue";
    case Err::AlreadySparse: return "AlreadySparse";
    case Err::EmptyInput: return "EmptyInput";
    case Err::SizeMismatch: return "SizeMismatch";
    case Err::TooLarge: return "TooLarge";
    case Err::EmptyTrainingSet: return "EmptyTrainingSet";
    case Err::NonFinite: return "NonFinite";
    case Err::BadVersion: return "BadVersion";
    case Err::ParseError: return "ParseError";
    case Err::MissingField: return "MissingField";
    case Err::IdMismatch: return "IdMismatch";
    case Err::NoGroundTruth: return "NoGroundTruth";
    case Err::ImageTooSmall: return "ImageTooSmall";
    case Err::DegenerateContext: return "DegenerateContext";
  }
  return "Unknown";
}

}  // namespace salprop
