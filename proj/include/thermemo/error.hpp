#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thermemo {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Phi(A u0) too small: the kernel cannot be isolated from the measurement.
class ChiSingular : public Error {
 public:
  explicit ChiSingular(double phi_au0)
      : Error("ChiSingular: nondegeneracy violated, |Phi(A u0)| = " + std::to_string(phi_au0) +
              " is below tol_chi"),
        phi_au0_(phi_au0) {}
  double phi_au0() const { return phi_au0_; }

 private:
  double phi_au0_;
};

class VolterraSingular : public Error {
 public:
  VolterraSingular(std::size_t node, double denominator)
      : Error("VolterraSingular: kernel step denominator " + std::to_string(denominator) +
              " at node " + std::to_string(node)),
        node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

class PicardDiverged : public Error {
 public:
  PicardDiverged(std::size_t step, double previous, double last)
      : Error("PicardDiverged: step " + std::to_string(step) + ", last residuals " +
              std::to_string(previous) + ", " + std::to_string(last)),
        step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// Raised in strict mode when the initial data do not match the measurement.
class CompatibilityViolation : public Error {
 public:
  using Error::Error;
};

class LinearSolveFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace thermemo
