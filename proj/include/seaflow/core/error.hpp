#pragma once

#include <string>
#include <utility>
#include <variant>

namespace seaflow {

enum class Errc {
    Ok = 0,
    // identity / access
    NotAuthorized,
    UnknownPrincipal,
    GrantExceedsRole,
    BadSignature,
    Expired,
    // broker
    InvalidTopic,
    MalformedPacket,
    ProtocolViolation,
    // ingestion / transform
    UnparseablePayload,
    SourceUnavailable,
    MappingNotFound,
    IncompleteMapping,
    ConversionError,
    // canonical model
    TimeRegression,
    // sim
    NodeDead,
    // monitoring
    NegativeCounterDelta,
    // scenario
    ConfigError,
};

const char* errc_name(Errc c);

struct Error {
    Errc code = Errc::Ok;
    std::string message;
};

/**
 * Expected<T> - value-or-Error return for data-path operations.
 *
 * Errors here are data, not exceptional control flow: a rejected record or a
 * denied publish is a normal outcome that callers inspect and count.
 */
template <typename T>
class Expected {
public:
    Expected(T value) : v_(std::move(value)) {}
    Expected(Error err) : v_(std::move(err)) {}
    Expected(Errc code, std::string message) : v_(Error{code, std::move(message)}) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return std::get<T>(v_); }
    T& value() & { return std::get<T>(v_); }
    T&& value() && { return std::get<T>(std::move(v_)); }

    const T& operator*() const& { return value(); }
    T& operator*() & { return value(); }
    T&& operator*() && { return std::move(*this).value(); }
    const T* operator->() const { return &value(); }
    T* operator->() { return &value(); }

    const Error& error() const { return std::get<Error>(v_); }
    Errc code() const { return ok() ? Errc::Ok : error().code; }

private:
    std::variant<T, Error> v_;
};

template <>
class Expected<void> {
public:
    Expected() = default;
    Expected(Error err) : err_(std::move(err)) {}
    Expected(Errc code, std::string message) : err_(Error{code, std::move(message)}) {}

    bool ok() const { return err_.code == Errc::Ok; }
    explicit operator bool() const { return ok(); }
    const Error& error() const { return err_; }
    Errc code() const { return err_.code; }

private:
    Error err_;
};

/// Config and wiring failures abort the run; they are not data-path outcomes.
struct ConfigException {
    std::string path;
    std::string field;
    std::string message;
};

}  // namespace seaflow
