#ifndef SPAPNET_ERROR_HPP
#define SPAPNET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace spapnet {

// Raised for problems in user-supplied inputs (files, flags, config values).
// The CLI maps this to exit code 1; anything else escaping to main is an
// internal failure and maps to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spapnet

#endif  // SPAPNET_ERROR_HPP
