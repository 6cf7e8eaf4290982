#pragma once

#include <stdexcept>
#include <string>

namespace pstest {

// Numeric values double as process exit codes and C-API status codes.
enum class ErrorCode : int {
    internal = 1,
    invalid_input = 2,
    no_convergence = 3,
    singular_design = 4,
    degenerate_variance = 5,
    degenerate_draw = 6,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::internal: return "Internal";
        case ErrorCode::invalid_input: return "InvalidInput";
        case ErrorCode::no_convergence: return "NoConvergence";
        case ErrorCode::singular_design: return "SingularDesign";
        case ErrorCode::degenerate_variance: return "DegenerateVariance";
        case ErrorCode::degenerate_draw: return "DegenerateDraw";
    }
    return "Unknown";
}

} // namespace pstest
