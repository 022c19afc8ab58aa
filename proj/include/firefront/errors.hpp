#pragma once

#include <stdexcept>
#include <string>

namespace firefront {

// Exit-code mapping: ConfigError -> 1, DivergedError -> 2, IoError -> 3.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivergedError : std::runtime_error {
    explicit DivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace firefront
