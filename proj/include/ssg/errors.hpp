#pragma once

#include <stdexcept>
#include <string>

namespace ssg {

// Bad user input (presentation files, malformed rules, unknown names).
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configured resource cap tripped (machine state budget, search depth).
class state_cap_error : public std::runtime_error {
 public:
  explicit state_cap_error(std::size_t cap)
      : std::runtime_error("machine state cap exceeded (" +
                           std::to_string(cap) + " states)"),
        cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

// A hypothesis required by the decision method does not hold for this
// input (e.g. the collapsed graph is not strongly connected), so the
// requested verdict cannot be produced. Not a bug and not bad syntax.
class inapplicable_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invariant violation inside the library itself.
class internal_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ssg
