#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spoc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (OBJ, JSON, SPVM).
class ParseError : public Error {
 public:
  using Error::Error;
};

class DegenerateFaceError : public Error {
 public:
  DegenerateFaceError(std::string message, std::vector<std::size_t> faces)
      : Error(std::move(message)), faces_(std::move(faces)) {}
  const std::vector<std::size_t>& faces() const { return faces_; }

 private:
  std::vector<std::size_t> faces_;
};

// Sampling produced no samples (everything filtered out).
class EmptySurfaceError : public Error {
 public:
  using Error::Error;
};

// Inputs that are individually valid but inconsistent with each other
// (dimension or content-hash mismatch, coincident sensor and sample, ...).
class InconsistentInputError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace spoc
