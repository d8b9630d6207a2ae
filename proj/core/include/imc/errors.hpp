#pragma once

#include <stdexcept>
#include <string>

namespace imc {

// Unusable input: missing/malformed files, bad parameter combinations.
// The CLI maps this to exit code 2.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

// A statistical procedure could not produce a usable result
// (e.g. every grid candidate dropped). The CLI maps this to exit code 1.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace imc
