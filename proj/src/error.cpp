#include "tcsim/error.hpp"

namespace tcsim {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse: return "parse";
        case ErrorCode::validation: return "validation";
        case ErrorCode::format: return "format";
        case ErrorCode::lookup: return "lookup";
        case ErrorCode::config: return "config";
        case ErrorCode::io: return "io";
        case ErrorCode::workspace: return "workspace";
    }
    return "unknown";
}

}  // namespace tcsim
