#include "kma/errors.hpp"

#include <cstdio>

namespace kma {

namespace {
std::string fmt_point(std::size_t point, double min_eig) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "metric not positive definite at point %zu (min eigenvalue %.6g)",
                point, min_eig);
  return buf;
}
}  // namespace

PositivityViolation::PositivityViolation(std::size_t point, double min_eig)
    : Error(fmt_point(point, min_eig)), point_(point), min_eig_(min_eig) {}

NoConvergence::NoConvergence(const std::string& what, int iterations, double residual)
    : Error(what), iterations_(iterations), residual_(residual) {}

PathStalled::PathStalled(double t, const std::string& cause)
    : Error("path stalled at t=" + std::to_string(t) + " (" + cause + ")"), t_(t), cause_(cause) {}

}  // namespace kma
