#pragma once

#include <stdexcept>
#include <string>

namespace iotbandit {

/// Invalid scenario or bench configuration. `key()` names the offending
/// setting so front ends can point at it.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& what)
        : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key))
    {
    }

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace iotbandit
