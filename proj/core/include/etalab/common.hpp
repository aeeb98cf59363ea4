#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace etalab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline const Complex kI{0.0, 1.0};
inline const Complex kTwoPiI{0.0, 2.0 * kPi};

inline constexpr double kDefaultMarginFloor = 1e-10;
inline constexpr double kDefaultTailTol = 1e-8;

struct EtalabError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic per-case RNG: stream id derived from (seed, label).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, const std::string& label)
      : engine_(mix(seed, fnv1a(label))) {}

  double uniform(double a = 0.0, double b = 1.0) {
    return std::uniform_real_distribution<double>(a, b)(engine_);
  }
  double gaussian(double sigma = 1.0) {
    return std::normal_distribution<double>(0.0, sigma)(engine_);
  }
  Complex complex_gaussian(double sigma = 1.0) {
    return {gaussian(sigma), gaussian(sigma)};
  }
  int uniform_int(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  Matrix matrix(int n, double sigma = 1.0) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = complex_gaussian(sigma);
    return m;
  }
  Matrix hermitian(int n, double sigma = 1.0) {
    Matrix m = matrix(n, sigma);
    return 0.5 * (m + m.adjoint()).eval();
  }

  static std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }

 private:
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull + b;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::mt19937_64 engine_;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw EtalabError(msg);
}

}  // namespace etalab
