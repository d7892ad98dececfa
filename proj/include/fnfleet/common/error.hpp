#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fnfleet {

/// Every failure the platform raises carries one of these codes. The HTTP
/// layer maps each code to exactly one status.
enum class ErrorCode {
    Validation,
    Binding,
    NotFound,
    InUse,
    Precondition,
    Transport,
    SessionClosed,
    Launch,
    UnresolvedPlaceholder,
    UnsafeValue,
    UnknownDevice,
    MalformedBatch,
    UnknownAction,
    HandlerFailure,
    RegistrationExhausted,
    Connection,
    Unauthorized,
    Scenario,
    Storage,
    Usage,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

template <ErrorCode C>
class TypedError : public Error {
public:
    explicit TypedError(const std::string& what) : Error(C, what) {}
};

using ValidationError = TypedError<ErrorCode::Validation>;
using BindingError = TypedError<ErrorCode::Binding>;
using NotFound = TypedError<ErrorCode::NotFound>;
using InUseError = TypedError<ErrorCode::InUse>;
using PreconditionError = TypedError<ErrorCode::Precondition>;
using TransportError = TypedError<ErrorCode::Transport>;
using SessionClosed = TypedError<ErrorCode::SessionClosed>;
using LaunchError = TypedError<ErrorCode::Launch>;
using UnresolvedPlaceholder = TypedError<ErrorCode::UnresolvedPlaceholder>;
using UnsafeValue = TypedError<ErrorCode::UnsafeValue>;
using UnknownDevice = TypedError<ErrorCode::UnknownDevice>;
using MalformedBatch = TypedError<ErrorCode::MalformedBatch>;
using UnknownAction = TypedError<ErrorCode::UnknownAction>;
using HandlerFailure = TypedError<ErrorCode::HandlerFailure>;
using RegistrationExhausted = TypedError<ErrorCode::RegistrationExhausted>;
using ConnectionError = TypedError<ErrorCode::Connection>;
using Unauthorized = TypedError<ErrorCode::Unauthorized>;
using ScenarioError = TypedError<ErrorCode::Scenario>;
using StorageError = TypedError<ErrorCode::Storage>;
using UsageError = TypedError<ErrorCode::Usage>;

} // namespace fnfleet
