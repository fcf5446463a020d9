#ifndef HORODRIFT_ERROR_HPP
#define HORODRIFT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace horodrift {

// Exception with a machine-readable code; the CLI maps these to JSON error
// records. Codes in use: invalid_point, contract_error, unknown_space,
// unknown_group, parse_error, numerical_error, singularity, unsupported,
// domain_error, mismatched_input.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace horodrift

#endif
