#pragma once

// Brute-force enumeration oracles for small groups. Independent of the
// lattice code: subgroups are explicit element sets built by closure.

#include "ent/finabel.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using ent::Coeff;
using ent::finabel::Element;
using ent::finabel::FiniteAbelianGroup;
using ElementSet = std::set<Element>;

inline Element add(const FiniteAbelianGroup& a, const Element& x, const Element& y) {
  Element z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] + y[i]) % a.modulus(i);
  return z;
}

inline ElementSet span(const FiniteAbelianGroup& a, const std::vector<Element>& gens) {
  ElementSet seen{a.zero()};
  std::deque<Element> todo{a.zero()};
  while (!todo.empty()) {
    Element x = todo.front();
    todo.pop_front();
    for (const auto& g : gens) {
      Element y = add(a, x, a.reduce(g));
      if (seen.insert(y).second) todo.push_back(y);
    }
  }
  return seen;
}

inline ElementSet all(const FiniteAbelianGroup& a) {
  ElementSet s;
  a.for_each_element([&](const Element& x) { s.insert(x); });
  return s;
}

inline ElementSet elements_of(const ent::finabel::AbSubgroup& h) { return span(h.ambient(), h.generators()); }

inline ElementSet intersect(const ElementSet& x, const ElementSet& y) {
  ElementSet out;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::inserter(out, out.begin()));
  return out;
}

inline ElementSet sum(const FiniteAbelianGroup& a, const ElementSet& x, const ElementSet& y) {
  ElementSet out;
  for (const auto& p : x)
    for (const auto& q : y) out.insert(add(a, p, q));
  return out;
}

inline Element apply(const ent::Matrix<Coeff>& m, const FiniteAbelianGroup& target, const Element& x) {
  Element y(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    long long acc = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc = (acc + m(r, c) * x[c]) % target.modulus(r);
    y[r] = ((acc % target.modulus(r)) + target.modulus(r)) % target.modulus(r);
  }
  return y;
}

/// Circle-valued pairing sum x_i chi_i / d_i, as a value in Z/lcm.
inline Coeff pairing(const FiniteAbelianGroup& a, const Element& x, const Element& chi) {
  Coeff m = a.exponent();
  long long acc = 0;
  for (std::size_t i = 0; i < a.rank(); ++i) acc = (acc + x[i] * chi[i] % m * (m / a.modulus(i))) % m;
  return static_cast<Coeff>(acc);
}

inline Element random_element(const FiniteAbelianGroup& a, std::mt19937_64& rng) {
  Element x(a.rank());
  for (std::size_t i = 0; i < a.rank(); ++i)
    x[i] = std::uniform_int_distribution<Coeff>(0, a.modulus(i) - 1)(rng);
  return x;
}

inline std::vector<Element> random_gens(const FiniteAbelianGroup& a, std::mt19937_64& rng, int max_count) {
  std::vector<Element> g;
  int n = std::uniform_int_distribution<int>(0, max_count)(rng);
  for (int i = 0; i < n; ++i) g.push_back(random_element(a, rng));
  return g;
}

/// Random well-defined matrix A -> B: entry (r, c) is a multiple of
/// d_r / gcd(d_r, d_c), which is exactly the well-definedness condition.
inline ent::Matrix<Coeff> random_hom_matrix(const FiniteAbelianGroup& a, const FiniteAbelianGroup& b,
                                            std::mt19937_64& rng) {
  ent::Matrix<Coeff> m(b.rank(), a.rank());
  for (std::size_t r = 0; r < b.rank(); ++r)
    for (std::size_t c = 0; c < a.rank(); ++c) {
      Coeff step = b.modulus(r) / std::gcd(b.modulus(r), a.modulus(c));
      m(r, c) = step * std::uniform_int_distribution<Coeff>(0, b.modulus(r))(rng) % b.modulus(r);
    }
  return m;
}

/// Every abelian group of order <= bound, as invariant-factor lists
/// d_1 | d_2 | ... with d_1 > 1.
inline std::vector<FiniteAbelianGroup> abelian_groups_up_to(Coeff bound) {
  std::vector<FiniteAbelianGroup> out{FiniteAbelianGroup{}};
  std::vector<std::vector<Coeff>> stack;
  for (Coeff d = 2; d <= bound; ++d) stack.push_back({d});
  while (!stack.empty()) {
    auto f = stack.back();
    stack.pop_back();
    out.emplace_back(f);
    Coeff order = 1;
    for (Coeff d : f) order *= d;
    // prepend smaller invariant factors dividing the current first one
    for (Coeff d = 2; d <= f.front() && order * d <= bound; ++d)
      if (f.front() % d == 0) {
        auto g = f;
        g.insert(g.begin(), d);
        stack.push_back(g);
      }
  }
  return out;
}

}  // namespace oracle
