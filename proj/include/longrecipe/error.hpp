#pragma once

#include <stdexcept>
#include <string>

namespace longrecipe {

// Bad or inconsistent user input: malformed files, out-of-range parameters,
// mismatched checkpoints. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A produced artifact violated one of its own invariants. Exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require_input(bool ok, const std::string& message) {
  if (!ok) throw InputError(message);
}

inline void require_invariant(bool ok, const std::string& message) {
  if (!ok) throw InvariantError(message);
}

}  // namespace longrecipe
