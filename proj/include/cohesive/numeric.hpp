// Scalar type, tolerance constants and small numeric helpers shared by the
// whole library.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

namespace cohesive {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace tol {
// Identities that are polynomial in well-scaled inputs.
inline constexpr double exact = 1e-10;
// Hodge-package operator identities.
inline constexpr double hodge = 1e-9;
// Sparse normal form: terms below this Frobenius norm are dropped.
inline constexpr double drop = 1e-14;
// Supertrace / supercommutator identities.
inline constexpr double supertrace = 1e-12;
// Relative singular-value threshold for numerical ranks.
inline constexpr double rank_rel = 1e-8;
// Relative eigenvalue threshold for the harmonic subspace.
inline constexpr double harmonic_rel = 1e-8;
// Per-coefficient obstruction vanishing threshold.
inline constexpr double obstruction = 1e-9;
// Gauge-orbit checks run at a slightly looser tolerance.
inline constexpr double gauge = 1e-8;
// Flatness acceptance for model construction.
inline constexpr double flatness = 1e-9;
}  // namespace tol

// Tolerances a CLI run operates under; reports embed the values in force.
struct ToleranceProfile {
  std::string name = "default";
  double flatness = tol::flatness;
  double residual = tol::hodge;
  double obstruction = tol::obstruction;
  double rank_rel = tol::rank_rel;

  static ToleranceProfile named(const std::string& which) {
    ToleranceProfile p;
    p.name = which;
    if (which == "strict") {
      p.flatness = 1e-11;
      p.residual = 1e-11;
      p.obstruction = 1e-11;
    } else if (which == "loose") {
      p.flatness = 1e-6;
      p.residual = 1e-6;
      p.obstruction = 1e-6;
    }
    return p;
  }
};

inline int parity_sign(long long k) { return (k % 2 == 0) ? 1 : -1; }

inline int numerical_rank(const Matrix& m, double rel = tol::rank_rel) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cut = rel * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return r;
}

}  // namespace cohesive
