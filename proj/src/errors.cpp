#include "anytime/errors.hpp"

#include <utility>

#include <fmt/format.h>

namespace anytime {

InfeasiblePointError::InfeasiblePointError(std::size_t index, double value)
    : DomainError(fmt::format("constraint {} is not strictly satisfied: f_{}(x) = {}", index, index,
                              value)),
      index_(index),
      value_(value) {}

ConfigError::ConfigError(std::size_t line, std::string key, const std::string& message)
    : Error(line > 0 ? fmt::format("config line {}: key '{}': {}", line, key, message)
                     : fmt::format("config key '{}': {}", key, message)),
      line_(line),
      key_(std::move(key)) {}

}  // namespace anytime
