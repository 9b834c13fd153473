#pragma once

#include <stdexcept>

namespace falcon {

enum class ProtocolErrorKind {
    already_started,
    not_broadcaster,
    wrong_instance,
    double_input,
    invalid_one_input,
};

/// Caller misuse of a protocol state machine. Network input never throws.
class ProtocolError : public std::logic_error {
public:
    ProtocolError(ProtocolErrorKind kind, const char* what) : std::logic_error(what), kind_(kind) {}
    ProtocolErrorKind kind() const { return kind_; }

private:
    ProtocolErrorKind kind_;
};

}  // namespace falcon
