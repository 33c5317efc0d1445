// The formal Dolbeault algebra of the parameter disk: polynomials in t and
// (optionally) tbar, dtbar, truncated by total weight, with the contraction
// that trivializes the dbar-cohomology.
#pragma once

#include "cohesive/base_algebra.hpp"
#include "cohesive/series.hpp"

namespace cohesive {

class ParameterAlgebra {
 public:
  struct Monomial {
    std::vector<int> t;     // holomorphic exponents
    std::vector<int> tbar;  // antiholomorphic exponents
    unsigned dtbar = 0;     // bitmask of dtbar factors

    int poly_degree() const {
      int s = 0;
      for (int k : t) s += k;
      for (int k : tbar) s += k;
      return s;
    }
    int dtbar_degree() const { return __builtin_popcount(dtbar); }
    // truncation weight: dtbar counts like the tbar it came from
    int weight() const { return poly_degree() + dtbar_degree(); }
    int antiholomorphic_weight() const {
      int s = dtbar_degree();
      for (int k : tbar) s += k;
      return s;
    }
    bool is_holomorphic() const { return antiholomorphic_weight() == 0; }

    std::string label() const {
      std::string s;
      auto app = [&s](const std::string& piece) {
        if (!s.empty()) s += " ";
        s += piece;
      };
      for (size_t i = 0; i < t.size(); ++i)
        if (t[i] > 0)
          app("t" + std::to_string(i + 1) + (t[i] > 1 ? "^" + std::to_string(t[i]) : ""));
      for (size_t i = 0; i < tbar.size(); ++i)
        if (tbar[i] > 0)
          app("tb" + std::to_string(i + 1) + (tbar[i] > 1 ? "^" + std::to_string(tbar[i]) : ""));
      for (size_t i = 0; i < t.size(); ++i)
        if (dtbar & (1u << i)) app("dtb" + std::to_string(i + 1));
      return s.empty() ? "1" : s;
    }
  };

  ParameterAlgebra(int vars, int order, bool antiholomorphic)
      : vars_(vars), order_(order), antiholomorphic_(antiholomorphic) {
    if (vars < 1 || vars > 4) throw std::invalid_argument("ParameterAlgebra: 1 <= m <= 4");
    if (order < 1 || order > 10) throw std::invalid_argument("ParameterAlgebra: 1 <= N <= 10");
    enumerate();
    if (antiholomorphic_) build_algebra();
  }

  int vars() const { return vars_; }
  int order() const { return order_; }
  bool antiholomorphic() const { return antiholomorphic_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }
  const Monomial& monomial(int idx) const { return monomials_[idx]; }

  BasePtr algebra() const {
    if (!antiholomorphic_)
      throw std::invalid_argument("ParameterAlgebra: holomorphic-only algebra has no Dolbeault structure");
    return algebra_;
  }

  int index_of(const Monomial& m) const {
    auto it = lookup_.find(key(m));
    if (it == lookup_.end()) return -1;
    return it->second;
  }

  int index_of_t_power(const MultiIndex& p) const {
    Monomial m;
    m.t = p.v;
    m.tbar.assign(vars_, 0);
    return index_of(m);
  }

  // Weighted Euler contraction: on tbar^q dtbar_J with w = |q|+|J| > 0, one
  // dtbar is traded for its tbar with weight 1/w; t factors are spectators.
  std::vector<std::pair<int, cplx>> kappa(int idx) const {
    require_antiholomorphic();
    const Monomial& m = monomials_[idx];
    const int w = m.antiholomorphic_weight();
    std::vector<std::pair<int, cplx>> out;
    if (w == 0) return out;
    int before = 0;
    for (int i = 0; i < vars_; ++i) {
      if (!(m.dtbar & (1u << i))) continue;
      Monomial n = m;
      n.dtbar &= ~(1u << i);
      n.tbar[i] += 1;
      const int target = index_of(n);
      if (target >= 0)
        out.emplace_back(target, cplx(parity_sign(before)) / static_cast<double>(w));
      ++before;
    }
    return out;
  }

  // dbar = sum_i dtbar_i d/dtbar_i.
  std::vector<std::pair<int, cplx>> dbar(int idx) const {
    require_antiholomorphic();
    const Monomial& m = monomials_[idx];
    std::vector<std::pair<int, cplx>> out;
    for (int i = 0; i < vars_; ++i) {
      if (m.tbar[i] == 0 || (m.dtbar & (1u << i))) continue;
      Monomial n = m;
      n.tbar[i] -= 1;
      n.dtbar |= (1u << i);
      // the fresh dtbar_i enters from the left of the sorted dtbar word
      int before = 0;
      for (int j = 0; j < i; ++j)
        if (m.dtbar & (1u << j)) ++before;
      const int target = index_of(n);
      if (target >= 0)
        out.emplace_back(target, cplx(parity_sign(before)) * static_cast<double>(m.tbar[i]));
    }
    return out;
  }

  bool p0_keeps(int idx) const { return monomials_[idx].antiholomorphic_weight() == 0; }

 private:
  void require_antiholomorphic() const {
    if (!antiholomorphic_)
      throw std::invalid_argument("ParameterAlgebra: operation needs the antiholomorphic flavor");
  }

  static std::string key(const Monomial& m) {
    std::string k;
    for (int x : m.t) k += std::to_string(x) + ",";
    k += "|";
    for (int x : m.tbar) k += std::to_string(x) + ",";
    k += "|" + std::to_string(m.dtbar);
    return k;
  }

  void enumerate() {
    std::vector<std::vector<int>> tpows;
    std::vector<int> cur(vars_, 0);
    std::function<void(int, int)> rec = [&](int pos, int rem) {
      if (pos == vars_) {
        tpows.push_back(cur);
        return;
      }
      for (int k = 0; k <= rem; ++k) {
        cur[pos] = k;
        rec(pos + 1, rem - k);
      }
      cur[pos] = 0;
    };
    rec(0, order_);

    for (const auto& tp : tpows) {
      int tsum = 0;
      for (int x : tp) tsum += x;
      if (!antiholomorphic_) {
        Monomial m;
        m.t = tp;
        m.tbar.assign(vars_, 0);
        monomials_.push_back(m);
        continue;
      }
      std::vector<std::vector<int>> qpows;
      std::function<void(int, int)> recq = [&](int pos, int rem) {
        if (pos == vars_) {
          qpows.push_back(cur);
          return;
        }
        for (int k = 0; k <= rem; ++k) {
          cur[pos] = k;
          recq(pos + 1, rem - k);
        }
        cur[pos] = 0;
      };
      recq(0, order_ - tsum);
      for (const auto& qp : qpows) {
        int qsum = 0;
        for (int x : qp) qsum += x;
        for (unsigned mask = 0; mask < (1u << vars_); ++mask) {
          const int jd = __builtin_popcount(mask);
          if (tsum + qsum + jd > order_) continue;
          Monomial m;
          m.t = tp;
          m.tbar = qp;
          m.dtbar = mask;
          monomials_.push_back(m);
        }
      }
    }
    std::sort(monomials_.begin(), monomials_.end(), [](const Monomial& a, const Monomial& b) {
      if (a.weight() != b.weight()) return a.weight() < b.weight();
      if (a.dtbar_degree() != b.dtbar_degree()) return a.dtbar_degree() < b.dtbar_degree();
      if (a.t != b.t) return a.t < b.t;
      if (a.tbar != b.tbar) return a.tbar < b.tbar;
      return a.dtbar < b.dtbar;
    });
    for (size_t i = 0; i < monomials_.size(); ++i)
      lookup_[key(monomials_[i])] = static_cast<int>(i);
  }

  void build_algebra() {
    std::vector<BaseAlgebra::BasisEntry> basis;
    int unit = -1;
    for (size_t i = 0; i < monomials_.size(); ++i) {
      basis.push_back({monomials_[i].label(), monomials_[i].dtbar_degree()});
      if (monomials_[i].weight() == 0) unit = static_cast<int>(i);
    }
    auto alg = std::make_shared<BaseAlgebra>(std::move(basis), unit);
    const int n = static_cast<int>(monomials_.size());
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s) {
        const Monomial& a = monomials_[r];
        const Monomial& b = monomials_[s];
        if (a.dtbar & b.dtbar) continue;
        if (a.weight() + b.weight() > order_) continue;  // truncation ideal
        Monomial p;
        p.t.resize(vars_);
        p.tbar.resize(vars_);
        for (int i = 0; i < vars_; ++i) {
          p.t[i] = a.t[i] + b.t[i];
          p.tbar[i] = a.tbar[i] + b.tbar[i];
        }
        p.dtbar = a.dtbar | b.dtbar;
        // merge the two sorted dtbar words
        int sign = 1;
        for (int i = 0; i < vars_; ++i)
          if (b.dtbar & (1u << i)) {
            int count = 0;
            for (int j = i + 1; j < vars_; ++j)
              if (a.dtbar & (1u << j)) ++count;
            if (count % 2) sign = -sign;
          }
        const int u = index_of(p);
        if (u >= 0) alg->set_product(r, s, {{u, cplx(sign)}});
      }
    Matrix d = Matrix::Zero(n, n);
    for (int r = 0; r < n; ++r)
      for (const auto& [u, c] : dbar(r)) d(u, r) += c;
    alg->set_differential(std::move(d));
    algebra_ = std::move(alg);
  }

  int vars_, order_;
  bool antiholomorphic_;
  std::vector<Monomial> monomials_;
  std::map<std::string, int> lookup_;
  BasePtr algebra_;
};

// Coefficient vector over the parameter monomial basis.
struct ParameterElement {
  const ParameterAlgebra* params = nullptr;
  Vector coeffs;

  static ParameterElement zero(const ParameterAlgebra& p) {
    return {&p, Vector::Zero(static_cast<int>(p.monomials().size()))};
  }
  double norm() const { return coeffs.norm(); }
};

// kappa and dbar on coefficient vectors.
inline ParameterElement dbar_delta(const ParameterElement& x) {
  ParameterElement r = ParameterElement::zero(*x.params);
  for (int i = 0; i < x.coeffs.size(); ++i) {
    if (std::abs(x.coeffs(i)) <= tol::drop) continue;
    for (const auto& [u, c] : x.params->dbar(i)) r.coeffs(u) += c * x.coeffs(i);
  }
  return r;
}

inline ParameterElement dbar_homotopy(const ParameterElement& x) {
  ParameterElement r = ParameterElement::zero(*x.params);
  for (int i = 0; i < x.coeffs.size(); ++i) {
    if (std::abs(x.coeffs(i)) <= tol::drop) continue;
    for (const auto& [u, c] : x.params->kappa(i)) r.coeffs(u) += c * x.coeffs(i);
  }
  return r;
}

inline ParameterElement p0_project(const ParameterElement& x) {
  ParameterElement r = ParameterElement::zero(*x.params);
  for (int i = 0; i < x.coeffs.size(); ++i)
    if (x.params->p0_keeps(i)) r.coeffs(i) = x.coeffs(i);
  return r;
}

}  // namespace cohesive
