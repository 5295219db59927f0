#pragma once

// Small hand-rolled generators for property tests.

#include <cmath>

#include "nlg/poly.hpp"

namespace gen {

inline nlg::MultiPoly poly(const nlg::FieldParams& f, int m, int max_degree, int terms, nlg::Rng& rng) {
  nlg::MultiPoly p(f, m);
  for (int t = 0; t < terms; ++t) {
    nlg::Exponents e(m, 0);
    int budget = int(rng.below(max_degree + 1));
    for (int i = 0; i < m && budget > 0; ++i) {
      const int k = int(rng.below(budget + 1));
      e[rng.below(m)] += k;
      budget -= k;
    }
    p.add_term(e, f.sample(rng));
  }
  return p;
}

inline nlg::Point point(const nlg::FieldParams& f, int m, nlg::Rng& rng) {
  nlg::Point x(m);
  for (auto& v : x) v = f.sample(rng);
  return x;
}

// Naive monomial-sum evaluation.
inline nlg::Residue naive_eval(const nlg::MultiPoly& p, const nlg::Point& x) {
  const auto& f = p.field();
  nlg::Residue acc = 0;
  for (const auto& [e, c] : p.terms()) {
    nlg::Residue t = c;
    for (std::size_t i = 0; i < e.size(); ++i)
      for (std::uint32_t k = 0; k < e[i]; ++k) t = f.mul(t, x[i]);
    acc = f.add(acc, t);
  }
  return acc;
}

}  // namespace gen
