#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nsn {

// Every failure the library reports carries one of these codes so callers
// (and tests) can match on the condition instead of parsing messages.
enum class Errc {
    file_not_found,
    decode_error,
    io_error,
    format_error,
    out_of_bounds,
    patch_too_large,
    image_too_small,
    spec_count_mismatch,
    exemplar_too_small,
    missing_non_semantic,
    dim_mismatch,
    length_mismatch,
    empty_input,
    no_decisions,
    unmapped_class,
    degenerate_output,
    input_dir_missing,
    output_not_writable,
    invalid_argument,
};

inline std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::file_not_found:       return "FileNotFound";
        case Errc::decode_error:         return "DecodeError";
        case Errc::io_error:             return "IoError";
        case Errc::format_error:         return "FormatError";
        case Errc::out_of_bounds:        return "OutOfBounds";
        case Errc::patch_too_large:      return "PatchTooLarge";
        case Errc::image_too_small:      return "ImageTooSmall";
        case Errc::spec_count_mismatch:  return "SpecCountMismatch";
        case Errc::exemplar_too_small:   return "ExemplarTooSmall";
        case Errc::missing_non_semantic: return "MissingNonSemantic";
        case Errc::dim_mismatch:         return "DimMismatch";
        case Errc::length_mismatch:      return "LengthMismatch";
        case Errc::empty_input:          return "Empty";
        case Errc::no_decisions:         return "NoDecisions";
        case Errc::unmapped_class:       return "UnmappedClass";
        case Errc::degenerate_output:    return "DegenerateOutput";
        case Errc::input_dir_missing:    return "InputDirMissing";
        case Errc::output_not_writable:  return "OutputNotWritable";
        case Errc::invalid_argument:     return "InvalidArgument";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, Errc code, const std::string& message) {
    if (!condition) raise(code, message);
}

}  // namespace nsn
