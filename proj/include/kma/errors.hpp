#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kma {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ConfigError"; }
};

class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "FormatError"; }
};

class PositivityViolation : public Error {
 public:
  PositivityViolation(std::size_t point, double min_eig);
  std::size_t point() const { return point_; }
  double min_eigenvalue() const { return min_eig_; }
  const char* kind() const noexcept override { return "PositivityViolation"; }

 private:
  std::size_t point_;
  double min_eig_;
};

class IncompatibleRHS : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "IncompatibleRHS"; }
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, int iterations, double residual);
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }
  const char* kind() const noexcept override { return "NoConvergence"; }

 private:
  int iterations_;
  double residual_;
};

class SpectrumHit : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "SpectrumHit"; }
};

class ConeExit : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ConeExit"; }
};

class PathStalled : public Error {
 public:
  PathStalled(double t, const std::string& cause);
  double t() const { return t_; }
  const std::string& cause() const { return cause_; }
  const char* kind() const noexcept override { return "PathStalled"; }

 private:
  double t_;
  std::string cause_;
};

class WrongFamily : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "WrongFamily"; }
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "SingularMatrix"; }
};

}  // namespace kma
