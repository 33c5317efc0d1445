// Finite-dimensional graded-commutative differential algebras standing in for
// the antiholomorphic form algebra of the underlying space.
#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cohesive/numeric.hpp"

namespace cohesive {

class BaseAlgebra;
using BasePtr = std::shared_ptr<const BaseAlgebra>;

// One axiom check outcome; `witness` names the offending basis tuple.
struct AxiomReport {
  std::string axiom;
  bool passed = true;
  double worst = 0.0;
  std::string witness;
};

struct ValidationReport {
  std::vector<AxiomReport> axioms;
  bool all_passed() const {
    for (const auto& a : axioms)
      if (!a.passed) return false;
    return true;
  }
};

class BaseAlgebra {
 public:
  struct BasisEntry {
    std::string label;
    int degree = 0;
  };

  BaseAlgebra(std::vector<BasisEntry> basis, int unit_index)
      : basis_(std::move(basis)), unit_(unit_index) {
    products_.resize(basis_.size());
    for (auto& row : products_) row.resize(basis_.size());
    differential_ = Matrix::Zero(dim(), dim());
  }

  int dim() const { return static_cast<int>(basis_.size()); }
  int unit_index() const { return unit_; }
  const std::vector<BasisEntry>& basis() const { return basis_; }
  int degree(int r) const { return basis_[r].degree; }
  const std::string& label(int r) const { return basis_[r].label; }

  int index_of(const std::string& label) const {
    for (int r = 0; r < dim(); ++r)
      if (basis_[r].label == label) return r;
    throw std::invalid_argument("BaseAlgebra: unknown basis label '" + label + "'");
  }

  int max_degree() const {
    int m = 0;
    for (const auto& b : basis_) m = std::max(m, b.degree);
    return m;
  }

  void set_product(int r, int s, std::vector<std::pair<int, cplx>> terms) {
    products_[r][s] = std::move(terms);
  }

  // Structure constants of omega_r * omega_s as (basis index, coefficient).
  const std::vector<std::pair<int, cplx>>& product(int r, int s) const {
    return products_[r][s];
  }

  void set_differential(Matrix d) {
    if (d.rows() != dim() || d.cols() != dim())
      throw std::invalid_argument("BaseAlgebra: differential shape mismatch");
    differential_ = std::move(d);
  }
  const Matrix& differential() const { return differential_; }

  // Coefficient-vector product, mostly used by the validator.
  Vector multiply(const Vector& x, const Vector& y) const {
    Vector out = Vector::Zero(dim());
    for (int r = 0; r < dim(); ++r) {
      if (std::abs(x(r)) <= tol::drop) continue;
      for (int s = 0; s < dim(); ++s) {
        if (std::abs(y(s)) <= tol::drop) continue;
        for (const auto& [u, c] : products_[r][s]) out(u) += x(r) * y(s) * c;
      }
    }
    return out;
  }

  ValidationReport validate() const {
    ValidationReport rep;
    rep.axioms.push_back(check_unit());
    rep.axioms.push_back(check_degree_additivity());
    rep.axioms.push_back(check_graded_commutativity());
    rep.axioms.push_back(check_associativity());
    rep.axioms.push_back(check_leibniz());
    rep.axioms.push_back(check_d_squared());
    return rep;
  }

 private:
  Vector basis_vector(int r) const {
    Vector v = Vector::Zero(dim());
    v(r) = 1.0;
    return v;
  }

  AxiomReport check_unit() const {
    AxiomReport a{"unit", true, 0.0, ""};
    for (int r = 0; r < dim(); ++r) {
      const Vector e = basis_vector(r);
      const double left = (multiply(basis_vector(unit_), e) - e).norm();
      const double right = (multiply(e, basis_vector(unit_)) - e).norm();
      const double w = std::max(left, right);
      if (w > a.worst) {
        a.worst = w;
        a.witness = label(r);
      }
    }
    a.passed = a.worst <= tol::supertrace;
    return a;
  }

  AxiomReport check_degree_additivity() const {
    AxiomReport a{"degree additivity", true, 0.0, ""};
    for (int r = 0; r < dim(); ++r)
      for (int s = 0; s < dim(); ++s)
        for (const auto& [u, c] : products_[r][s])
          if (std::abs(c) > tol::drop && degree(u) != degree(r) + degree(s)) {
            a.passed = false;
            a.worst = std::abs(c);
            a.witness = label(r) + "*" + label(s) + "->" + label(u);
            return a;
          }
    return a;
  }

  AxiomReport check_graded_commutativity() const {
    AxiomReport a{"graded commutativity", true, 0.0, ""};
    for (int r = 0; r < dim(); ++r)
      for (int s = r; s < dim(); ++s) {
        const cplx sign(parity_sign(static_cast<long long>(degree(r)) * degree(s)));
        const Vector diff = multiply(basis_vector(r), basis_vector(s)) -
                            sign * multiply(basis_vector(s), basis_vector(r));
        if (diff.norm() > a.worst) {
          a.worst = diff.norm();
          a.witness = "(" + label(r) + "," + label(s) + ")";
        }
      }
    a.passed = a.worst <= tol::supertrace;
    return a;
  }

  AxiomReport check_associativity() const {
    AxiomReport a{"associativity", true, 0.0, ""};
    for (int r = 0; r < dim(); ++r)
      for (int s = 0; s < dim(); ++s)
        for (int u = 0; u < dim(); ++u) {
          const Vector left =
              multiply(multiply(basis_vector(r), basis_vector(s)), basis_vector(u));
          const Vector right =
              multiply(basis_vector(r), multiply(basis_vector(s), basis_vector(u)));
          const double w = (left - right).norm();
          if (w > a.worst) {
            a.worst = w;
            a.witness = "(" + label(r) + "," + label(s) + "," + label(u) + ")";
          }
        }
    a.passed = a.worst <= tol::supertrace;
    return a;
  }

  AxiomReport check_leibniz() const {
    AxiomReport a{"Leibniz", true, 0.0, ""};
    for (int r = 0; r < dim(); ++r)
      for (int s = 0; s < dim(); ++s) {
        const Vector lhs = differential_ * multiply(basis_vector(r), basis_vector(s));
        const cplx sign(parity_sign(degree(r)));
        const Vector rhs =
            multiply(differential_ * basis_vector(r), basis_vector(s)) +
            sign * multiply(basis_vector(r), differential_ * basis_vector(s));
        const double w = (lhs - rhs).norm();
        if (w > a.worst) {
          a.worst = w;
          a.witness = "(" + label(r) + "," + label(s) + ")";
        }
      }
    a.passed = a.worst <= tol::supertrace;
    return a;
  }

  AxiomReport check_d_squared() const {
    AxiomReport a{"d squared", true, 0.0, ""};
    a.worst = (differential_ * differential_).norm();
    a.passed = a.worst <= tol::supertrace;
    return a;
  }

  std::vector<BasisEntry> basis_;
  int unit_;
  std::vector<std::vector<std::vector<std::pair<int, cplx>>>> products_;
  Matrix differential_;
};

// Lambda(theta_1..theta_g): generators of degree 1, zero differential.
// Basis monomials are indexed by subsets of {1..g} via bitmask.
inline BasePtr build_exterior(int g) {
  if (g < 0 || g > 8) throw std::invalid_argument("build_exterior: need 0 <= g <= 8");
  const int n = 1 << g;
  std::vector<BaseAlgebra::BasisEntry> basis(n);
  for (int mask = 0; mask < n; ++mask) {
    std::string lab;
    int deg = 0;
    for (int i = 0; i < g; ++i)
      if (mask & (1 << i)) {
        lab += (lab.empty() ? "" : "^") + ("theta" + std::to_string(i + 1));
        ++deg;
      }
    if (lab.empty()) lab = "1";
    basis[mask] = {lab, deg};
  }
  auto alg = std::make_shared<BaseAlgebra>(std::move(basis), 0);
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s) {
      if (r & s) continue;  // repeated generator
      // Sign of interleaving the two sorted generator words.
      int sign = 1;
      for (int i = 0; i < g; ++i)
        if (s & (1 << i)) {
          int higher = r >> (i + 1);
          int count = 0;
          while (higher) {
            count += higher & 1;
            higher >>= 1;
          }
          if (count % 2) sign = -sign;
        }
      alg->set_product(r, s, {{r | s, cplx(sign)}});
    }
  return alg;
}

// X = point: one-dimensional algebra, zero differential.
inline BasePtr build_point() { return build_exterior(0); }

}  // namespace cohesive
