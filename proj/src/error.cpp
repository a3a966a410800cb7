#include "mfb/error.hpp"

namespace mfb {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::singular_evaluation: return "SingularEvaluation";
        case ErrorCode::non_finite: return "NonFinite";
        case ErrorCode::singular_diffusion: return "SingularDiffusion";
        case ErrorCode::invalid_law: return "InvalidLaw";
        case ErrorCode::invalid_grid: return "InvalidGrid";
        case ErrorCode::out_of_range: return "OutOfRange";
        case ErrorCode::missing_increments: return "MissingIncrements";
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::validation_error: return "ValidationError";
        case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

}  // namespace mfb
