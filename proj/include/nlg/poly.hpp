#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nlg/field.hpp"
#include "nlg/rational.hpp"

namespace nlg {

using Residue = std::uint64_t;
using Point = std::vector<Residue>;
using Exponents = std::vector<std::uint32_t>;

/// Sparse multivariate polynomial over a prime field. Terms are kept in
/// lexicographic exponent order with no zero coefficients, so equality and the
/// text format are canonical.
class MultiPoly {
 public:
  MultiPoly(const FieldParams& f, int num_vars);

  static MultiPoly constant(const FieldParams& f, int num_vars, Residue c);
  static MultiPoly variable(const FieldParams& f, int num_vars, int index);

  const FieldParams& field() const { return f_; }
  int num_vars() const { return m_; }
  const std::map<Exponents, Residue>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  /// Adds c * x^e to the polynomial.
  void add_term(const Exponents& e, Residue c);
  Residue coeff(const Exponents& e) const;

  /// -1 for the zero polynomial.
  int total_degree() const;
  int degree_in(int var) const;
  int max_individual_degree() const;

  Residue evaluate(std::span<const Residue> point) const;
  Residue operator()(std::span<const Residue> point) const { return evaluate(point); }

  MultiPoly scaled(Residue c) const;
  friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b);
  friend MultiPoly operator-(const MultiPoly& a, const MultiPoly& b);
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);
  friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
    return a.f_ == b.f_ && a.m_ == b.m_ && a.terms_ == b.terms_;
  }

 private:
  FieldParams f_;
  int m_;
  std::map<Exponents, Residue> terms_;
};

/// Dense univariate polynomial, coefficients low to high, trailing zeros trimmed.
class UniPoly {
 public:
  explicit UniPoly(const FieldParams& f, std::vector<Residue> coeffs = {});
  static UniPoly constant(const FieldParams& f, Residue c) { return UniPoly(f, {c}); }

  const FieldParams& field() const { return f_; }
  const std::vector<Residue>& coeffs() const { return c_; }
  int degree() const { return int(c_.size()) - 1; }
  Residue evaluate(Residue t) const;

  friend UniPoly operator+(const UniPoly& a, const UniPoly& b);
  friend UniPoly operator*(const UniPoly& a, const UniPoly& b);
  friend bool operator==(const UniPoly& a, const UniPoly& b) { return a.f_ == b.f_ && a.c_ == b.c_; }

 private:
  void trim();
  FieldParams f_;
  std::vector<Residue> c_;
};

/// Dense bivariate polynomial of total degree at most `bound`.
class BiPoly {
 public:
  BiPoly(const FieldParams& f, int bound);

  const FieldParams& field() const { return f_; }
  int bound() const { return bound_; }
  /// Coefficient of a^i b^j, i + j <= bound.
  Residue coeff(int i, int j) const { return c_[index(i, j)]; }
  void set(int i, int j, Residue v) { c_[index(i, j)] = v; }
  /// Actual total degree, -1 for zero.
  int degree() const;
  Residue evaluate(Residue a, Residue b) const;
  const std::vector<Residue>& raw() const { return c_; }

  /// Number of stored coefficients for a given bound.
  static std::size_t size_for(int bound) { return std::size_t(bound + 1) * (bound + 2) / 2; }

  friend BiPoly operator+(const BiPoly& a, const BiPoly& b);
  friend BiPoly operator*(const BiPoly& a, const BiPoly& b);
  friend bool operator==(const BiPoly& a, const BiPoly& b);

  /// Same polynomial stored with a different bound; InvalidInput if it does not fit.
  BiPoly resized(int bound) const;
  MultiPoly to_multi() const;
  static BiPoly from_multi(const MultiPoly& p, int bound);
  /// Canonical coefficient order (graded by total degree, then by i descending).
  static BiPoly from_raw(const FieldParams& f, int bound, std::vector<Residue> raw);

 private:
  std::size_t index(int i, int j) const {
    const int s = i + j;
    return std::size_t(s) * (s + 1) / 2 + std::size_t(j);
  }
  FieldParams f_;
  int bound_;
  std::vector<Residue> c_;
};

/// Affine subspace z + span(y_1..y_k) of F^m. In canonical form the directions
/// are in reduced row-echelon form and the base point is zero on the pivot
/// columns, so the coordinates of a point are its entries at the pivots.
struct AffineSubspace {
  FieldParams field;
  int ambient = 0;
  Point base;
  std::vector<Point> directions;
  bool canonical = false;

  int dim() const { return int(directions.size()); }
  Point point_at(std::span<const Residue> coords) const;
  friend bool operator==(const AffineSubspace&, const AffineSubspace&) = default;
};

/// Rank of a list of vectors over the field.
int rank_of(const FieldParams& f, const std::vector<Point>& vectors);

/// Throws InvalidInput when the directions are dependent.
AffineSubspace canonicalize(const AffineSubspace& s);

/// Pivot column of each direction of a canonical subspace.
std::vector<int> pivots(const AffineSubspace& canonical);

/// Coordinates of `x` in a canonical subspace; InvalidInput if x is not in it.
Point coordinates_of(const AffineSubspace& canonical, std::span<const Residue> x);

struct SubspaceDraw {
  AffineSubspace subspace;  // canonical when !dependent, raw draw otherwise
  bool dependent = false;
};

/// Uniform base point and k uniform directions; `dependent` reports a raw
/// draw whose directions were linearly dependent.
SubspaceDraw sample_subspace(const FieldParams& f, int m, int k, Rng& rng);

std::vector<Point> enumerate_points(const AffineSubspace& s, std::uint64_t cap = 1u << 22);

/// All of F^m in little-endian order; TooLarge beyond `cap`.
std::vector<Point> enumerate_space(const FieldParams& f, int m, std::uint64_t cap = 1u << 22);

/// q(alpha) = p(z + sum alpha_i y_i), as a polynomial in dim(s) variables.
MultiPoly restrict_to_subspace(const MultiPoly& p, const AffineSubspace& s);

/// Fast path for planes; `bound` must be at least total_degree(p).
BiPoly restrict_to_plane(const MultiPoly& p, const AffineSubspace& plane, int bound);

/// Unique polynomial of individual degree <= h agreeing with `values` on the
/// grid {0..h}^m. values[k] is the value at the point whose base-(h+1) digits
/// (little-endian) spell k.
MultiPoly low_degree_extension(const FieldParams& f, std::span<const Residue> values, int h, int m);
MultiPoly low_degree_extension(const FieldParams& f, const std::map<Point, Residue>& values, int h, int m);

/// ceil(log2(d + 1)); the number of squaring levels of the substitution map.
int sharp_levels(int d);

/// (x^{2^0},...,x^{2^{t-1}}, y^{2^0},...,y^{2^{t-1}}) with t = sharp_levels(d).
Point sharp_apply(const FieldParams& f, int d, Residue x, Residue y);
/// Univariate variant t -> (t^{2^0},...,t^{2^{l-1}}) with l = sharp_levels(d).
Point sharp_apply_univariate(const FieldParams& f, int d, Residue t);

/// Multilinear g' in 2 * sharp_levels(d) variables with g'(#P) = g(P).
MultiPoly substitute_vars(const MultiPoly& g, int d);
/// Same for univariate g of degree <= d; g' has sharp_levels(d) variables.
MultiPoly substitute_vars_univariate(const UniPoly& g, int d);

/// Degree <= 4 curve in F^m, one univariate polynomial per coordinate.
struct Curve4 {
  FieldParams field;
  std::vector<UniPoly> coords;

  int ambient() const { return int(coords.size()); }
  Point at(Residue t) const;
};

/// Curve with c(i) = points[i] for i = 0..3. Needs |F| >= 4.
Curve4 curve_through(const FieldParams& f, std::span<const Point> points);

/// g(c_1(t), ..., c_m(t)).
UniPoly restrict_to_curve(const MultiPoly& p, const Curve4& c);

/// Fraction of zeros of p at `trials` uniform points.
Rational zero_fraction(const MultiPoly& p, std::uint64_t trials, Rng& rng);
/// Exact zero fraction by enumerating F^m.
Rational zero_fraction_exhaustive(const MultiPoly& p, std::uint64_t cap = 1u << 22);

/// `p <modulus> m <vars>` header, then `coeff e1 ... em` lines in term order.
std::string to_text(const MultiPoly& p);
MultiPoly poly_from_text(const std::string& text);

}  // namespace nlg
