#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace wfcarbon {

// Domain error with a stable machine-greppable code ("CycleDetected",
// "UnknownRegion", ...) next to the human-readable text.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error("error[" + code + "]: " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void raise(std::string code, const std::string& message) {
    throw Error(std::move(code), message);
}

} // namespace wfcarbon
