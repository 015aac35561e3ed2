#include "svs/error.hpp"

namespace svs {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::ShapeMismatch: return "shape_mismatch";
    case ErrorCode::MalformedHeader: return "malformed_header";
    case ErrorCode::TruncatedPayload: return "truncated_payload";
    case ErrorCode::UnsupportedFormat: return "unsupported_format";
    case ErrorCode::Io: return "io";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::EmptySelection: return "empty_selection";
    case ErrorCode::Divergence: return "divergence";
    }
    return "unknown";
}

}  // namespace svs
