#ifndef TGRPO_ERRORS_HPP_
#define TGRPO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tgrpo {

// Invalid user-supplied configuration (bad architecture, N < 2, weights that
// do not sum to one, unknown config keys, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (dimension mismatch, action
// out of range, non-finite input).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A reward specification failed to classify a state into exactly one stage.
class SpecificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-finite value appeared inside a numerical computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible checkpoint / config file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tgrpo

#endif  // TGRPO_ERRORS_HPP_
