#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcac {

enum class ErrorCode {
    DimensionMismatch,
    NearSingularResolvent,
    EigenFailure,
    NotHermitian,
    InnovationSolveFailure,
    SingularNormalEquations,
    InnerSolveSingular,
    UnsupportedDimension,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Numerical or structural failure raised by the library. The code lets
/// callers (the scenario runner in particular) flag a step instead of aborting.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

   private:
    ErrorCode code_;
};

inline void require_dims(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace pcac
