#include "kma/fourier.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "kma/errors.hpp"

namespace kma {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid " + what + " '" + s + "'");
  }
}

int to_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid mode component '" + s + "'");
  }
}

}  // namespace

FourierTerm parse_fourier_term(const std::string& text, int n_complex) {
  const auto parts = split(text, ':');
  if (parts.size() < 3 || parts.size() > 4) throw ConfigError("Fourier term must be kind:mode:amplitude[:phase], got '" + text + "'");
  FourierTerm t;
  if (parts[0] == "cos") {
    t.cosine = true;
  } else if (parts[0] == "sin") {
    t.cosine = false;
  } else {
    throw ConfigError("Fourier term kind must be cos or sin, got '" + parts[0] + "'");
  }
  const auto comps = split(parts[1], ',');
  if (static_cast<int>(comps.size()) != 2 * n_complex)
    throw ConfigError("mode vector '" + parts[1] + "' must have " + std::to_string(2 * n_complex) + " entries");
  for (std::size_t a = 0; a < comps.size(); ++a) t.mode[a] = to_int(comps[a]);
  t.amplitude = to_double(parts[2], "amplitude");
  if (parts.size() == 4) t.phase = to_double(parts[3], "phase");
  return t;
}

std::string format_fourier_term(const FourierTerm& term, int n_complex) {
  std::ostringstream os;
  os.precision(17);
  os << (term.cosine ? "cos" : "sin") << ':';
  for (int a = 0; a < 2 * n_complex; ++a) os << (a ? "," : "") << term.mode[a];
  os << ':' << term.amplitude;
  if (term.phase != 0.0) os << ':' << term.phase;
  return os.str();
}

ScalarField sample_terms(const PeriodicGrid& grid, const std::vector<FourierTerm>& terms) {
  const double w = 2.0 * std::numbers::pi / grid.period();
  const int d = grid.dim();
  return ScalarField::sample(grid, [&](const std::array<double, 4>& x) {
    double v = 0.0;
    for (const auto& t : terms) {
      double arg = t.phase;
      for (int a = 0; a < d; ++a) arg += w * t.mode[a] * x[a];
      v += t.amplitude * (t.cosine ? std::cos(arg) : std::sin(arg));
    }
    return v;
  });
}

double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<FourierTerm> random_terms(int n_complex, int max_mode, double l1_amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int d = 2 * n_complex;
  const int side = 2 * max_mode + 1;
  int total = 1;
  for (int a = 0; a < d; ++a) total *= side;
  std::vector<FourierTerm> terms;
  double l1 = 0.0;
  for (int code = 0; code < total; ++code) {
    std::array<int, 4> k{};
    int c = code;
    for (int a = d - 1; a >= 0; --a) {
      k[a] = c % side - max_mode;
      c /= side;
    }
    // Keep one representative of each +-k pair.
    int first = 0;
    for (int a = 0; a < d; ++a)
      if (k[a] != 0) {
        first = k[a];
        break;
      }
    if (first <= 0) continue;
    for (bool cosine : {true, false}) {
      FourierTerm t;
      t.cosine = cosine;
      t.mode = k;
      t.amplitude = 2.0 * unit_double(rng()) - 1.0;
      l1 += std::abs(t.amplitude);
      terms.push_back(t);
    }
  }
  for (auto& t : terms) t.amplitude *= l1_amplitude / l1;
  return terms;
}

}  // namespace kma

namespace kma {

std::vector<FourierTerm> random_sparse_terms(int n_complex, int count, int max_mode, double amplitude,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int d = 2 * n_complex;
  std::vector<FourierTerm> terms;
  while (static_cast<int>(terms.size()) < count) {
    FourierTerm t;
    bool nonzero = false;
    for (int a = 0; a < d; ++a) {
      t.mode[a] = static_cast<int>(rng() % static_cast<std::uint64_t>(2 * max_mode + 1)) - max_mode;
      nonzero |= t.mode[a] != 0;
    }
    t.cosine = (rng() & 1) != 0;
    t.amplitude = amplitude * (2.0 * unit_double(rng()) - 1.0);
    if (nonzero) terms.push_back(t);
  }
  return terms;
}

}  // namespace kma
