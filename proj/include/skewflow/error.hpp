#pragma once

#include <stdexcept>
#include <string>

namespace skewflow {

// Malformed input files, bad flags, schema violations. CLI exit code 1.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A verification outcome that rules out the requested construction,
// e.g. asking for a non-uniqueness witness when d_minus = 0. CLI exit code 2.
class UniquenessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inverse Cayley transform is not applicable: Im(E + P) is a proper subspace.
class ExtensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Step matrix E - (dt/2)B or E - hB is singular.
class SingularStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace skewflow
