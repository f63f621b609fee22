#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kma/grid.hpp"

namespace kma {

/// amplitude * cos(2*pi*<mode, x>/L + phase), or sin when `cosine` is false.
struct FourierTerm {
  bool cosine = true;
  std::array<int, 4> mode{};
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Parses "cos:1,0:0.1" or "sin:0,1,0,0:0.05:0.3". The mode vector must have 2n entries.
FourierTerm parse_fourier_term(const std::string& text, int n_complex);
std::string format_fourier_term(const FourierTerm& term, int n_complex);

ScalarField sample_terms(const PeriodicGrid& grid, const std::vector<FourierTerm>& terms);

/// Seeded random trigonometric polynomial with |k_a| <= max_mode on every axis,
/// scaled so that the sum of |amplitudes| equals `l1_amplitude`.
std::vector<FourierTerm> random_terms(int n_complex, int max_mode, double l1_amplitude, std::uint64_t seed);

/// Uniform double in [0, 1) from a 64-bit engine output; identical on every platform.
double unit_double(std::uint64_t bits);

}  // namespace kma

namespace kma {

/// `count` seeded terms with random modes (|k_a| <= max_mode, k != 0) and amplitudes uniform in
/// [-amplitude, amplitude].
std::vector<FourierTerm> random_sparse_terms(int n_complex, int count, int max_mode, double amplitude,
                                             std::uint64_t seed);

}  // namespace kma
