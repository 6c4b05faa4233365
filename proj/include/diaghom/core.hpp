#ifndef DIAGHOM_CORE_HPP
#define DIAGHOM_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace diaghom {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a random draw turns out to be degenerate (rank failures in
/// generically full-rank constructions).  Callers re-randomize.
struct DegenerateDataError : NumericalError {
  using NumericalError::NumericalError;
};

/// Deterministic seeded generator.  All randomness in a run flows from one
/// of these; unit-modulus numbers are exp(2*pi*i*theta) with theta uniform,
/// generic complex numbers are uniform on the unit disk.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0,1), reproducible across platforms (avoids the
  /// implementation-defined std::uniform_real_distribution).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  Complex unit_modulus() { return std::polar(1.0, 2.0 * kPi * uniform()); }

  Complex disk() {
    const double r = std::sqrt(uniform());
    return std::polar(r, 2.0 * kPi * uniform());
  }

  CVector disk_vector(Eigen::Index n) {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = disk();
    return v;
  }

  /// Row-major fill order, so draws are reproducible for a given shape.
  CMatrix disk_matrix(Eigen::Index rows, Eigen::Index cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = disk();
    return m;
  }

  std::uint64_t derive_seed() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace diaghom

#endif  // DIAGHOM_CORE_HPP
