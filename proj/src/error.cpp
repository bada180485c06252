#include "bvs/error.hpp"

namespace bvs {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io: return "io";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::RankDeficiency: return "rank_deficiency";
        case ErrorKind::DegenerateResponse: return "degenerate_response";
        case ErrorKind::Integration: return "integration";
        case ErrorKind::Classification: return "classification";
        case ErrorKind::Construction: return "construction";
        case ErrorKind::InvariantViolation: return "invariant_violation";
        case ErrorKind::Estimation: return "estimation";
        case ErrorKind::Initialization: return "initialization";
        case ErrorKind::Refusal: return "refusal";
        case ErrorKind::Undefined: return "undefined";
    }
    return "unknown";
}

}  // namespace bvs
