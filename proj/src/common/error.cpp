#include <fnfleet/common/error.hpp>

namespace fnfleet {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Binding: return "binding";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::InUse: return "in-use";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Transport: return "transport";
    case ErrorCode::SessionClosed: return "session-closed";
    case ErrorCode::Launch: return "launch";
    case ErrorCode::UnresolvedPlaceholder: return "unresolved-placeholder";
    case ErrorCode::UnsafeValue: return "unsafe-value";
    case ErrorCode::UnknownDevice: return "unknown-device";
    case ErrorCode::MalformedBatch: return "malformed-batch";
    case ErrorCode::UnknownAction: return "unknown-action";
    case ErrorCode::HandlerFailure: return "handler-failure";
    case ErrorCode::RegistrationExhausted: return "registration-exhausted";
    case ErrorCode::Connection: return "connection";
    case ErrorCode::Unauthorized: return "unauthorized";
    case ErrorCode::Scenario: return "scenario";
    case ErrorCode::Storage: return "storage";
    case ErrorCode::Usage: return "usage";
    }
    return "unknown";
}

} // namespace fnfleet
