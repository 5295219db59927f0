#include "nlg/poly.hpp"

#include <algorithm>
#include <sstream>

namespace nlg {

namespace {

using TermIt = std::map<Exponents, Residue>::const_iterator;

// Horner evaluation of a sparse polynomial with each variable replaced by an
// element of some ring R. Terms are lexicographically sorted, so the terms
// sharing an exponent of `var` are contiguous.
template <class R, class Ring>
R horner(TermIt first, TermIt last, int var, int m, const std::vector<R>& subs, const Ring& ring) {
  if (first == last) return ring.zero();
  if (var == m) return ring.constant(first->second);
  std::vector<std::pair<std::uint32_t, std::pair<TermIt, TermIt>>> groups;
  for (TermIt it = first; it != last;) {
    const std::uint32_t e = it->first[var];
    TermIt end = it;
    while (end != last && end->first[var] == e) ++end;
    groups.push_back({e, {it, end}});
    it = end;
  }
  auto power = [&](std::uint32_t k) {
    R base = subs[var], acc = ring.constant(1);
    while (k) {
      if (k & 1) acc = ring.mul(acc, base);
      k >>= 1;
      if (k) base = ring.mul(base, base);
    }
    return acc;
  };
  R acc = horner<R>(groups.back().second.first, groups.back().second.second, var + 1, m, subs, ring);
  std::uint32_t prev = groups.back().first;
  for (auto g = groups.rbegin() + 1; g != groups.rend(); ++g) {
    acc = ring.add(ring.mul(acc, power(prev - g->first)), horner<R>(g->second.first, g->second.second, var + 1, m, subs, ring));
    prev = g->first;
  }
  if (prev) acc = ring.mul(acc, power(prev));
  return acc;
}

struct ResidueRing {
  const FieldParams& f;
  Residue zero() const { return 0; }
  Residue constant(Residue c) const { return c % f.modulus(); }
  Residue add(Residue a, Residue b) const { return f.add(a, b); }
  Residue mul(Residue a, Residue b) const { return f.mul(a, b); }
};

struct MultiRing {
  const FieldParams& f;
  int k;
  MultiPoly zero() const { return MultiPoly(f, k); }
  MultiPoly constant(Residue c) const { return MultiPoly::constant(f, k, c); }
  MultiPoly add(const MultiPoly& a, const MultiPoly& b) const { return a + b; }
  MultiPoly mul(const MultiPoly& a, const MultiPoly& b) const { return a * b; }
};

struct BiRing {
  const FieldParams& f;
  BiPoly zero() const { return BiPoly(f, 0); }
  BiPoly constant(Residue c) const {
    BiPoly p(f, 0);
    p.set(0, 0, c % f.modulus());
    return p;
  }
  BiPoly add(const BiPoly& a, const BiPoly& b) const { return a + b; }
  BiPoly mul(const BiPoly& a, const BiPoly& b) const { return a * b; }
};

struct UniRing {
  const FieldParams& f;
  UniPoly zero() const { return UniPoly(f); }
  UniPoly constant(Residue c) const { return UniPoly::constant(f, c % f.modulus()); }
  UniPoly add(const UniPoly& a, const UniPoly& b) const { return a + b; }
  UniPoly mul(const UniPoly& a, const UniPoly& b) const { return a * b; }
};

// Row j holds the coefficients (low to high) of the Lagrange basis polynomial
// that is 1 at node j and 0 at the other nodes 0..n-1.
std::vector<std::vector<Residue>> lagrange_basis(const FieldParams& f, int n) {
  std::vector<std::vector<Residue>> rows(n);
  for (int j = 0; j < n; ++j) {
    std::vector<Residue> poly{1};
    Residue denom = 1;
    for (int k = 0; k < n; ++k) {
      if (k == j) continue;
      std::vector<Residue> next(poly.size() + 1, 0);
      const Residue negk = f.neg(Residue(k) % f.modulus());
      for (std::size_t e = 0; e < poly.size(); ++e) {
        next[e + 1] = f.add(next[e + 1], poly[e]);
        next[e] = f.add(next[e], f.mul(poly[e], negk));
      }
      poly = std::move(next);
      denom = f.mul(denom, f.sub(Residue(j) % f.modulus(), Residue(k) % f.modulus()));
    }
    const Residue inv = f.inv(denom);
    for (auto& c : poly) c = f.mul(c, inv);
    rows[j] = std::move(poly);
  }
  return rows;
}

std::uint64_t checked_power(std::uint64_t base, int exp, std::uint64_t cap) {
  std::uint64_t n = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && n > cap / base) fail(ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
    n *= base;
  }
  if (n > cap) fail(ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
  return n;
}

// Advances a little-endian odometer over {0..base-1}^n; false after the last.
bool advance(Point& digits, Residue base) {
  for (auto& d : digits) {
    if (++d < base) return true;
    d = 0;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------- MultiPoly

MultiPoly::MultiPoly(const FieldParams& f, int num_vars) : f_(f), m_(num_vars) {
  require(num_vars >= 0, ErrorKind::InvalidInput, "negative variable count");
}

MultiPoly MultiPoly::constant(const FieldParams& f, int num_vars, Residue c) {
  MultiPoly p(f, num_vars);
  p.add_term(Exponents(num_vars, 0), c);
  return p;
}

MultiPoly MultiPoly::variable(const FieldParams& f, int num_vars, int index) {
  require(index >= 0 && index < num_vars, ErrorKind::DimensionMismatch, "variable index out of range");
  MultiPoly p(f, num_vars);
  Exponents e(num_vars, 0);
  e[index] = 1;
  p.add_term(e, 1);
  return p;
}

void MultiPoly::add_term(const Exponents& e, Residue c) {
  require(int(e.size()) == m_, ErrorKind::DimensionMismatch, "exponent vector length differs from variable count");
  c %= f_.modulus();
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second = f_.add(it->second, c);
    if (it->second == 0) terms_.erase(it);
  }
}

Residue MultiPoly::coeff(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0 : it->second;
}

int MultiPoly::total_degree() const {
  int best = -1;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (auto x : e) s += int(x);
    best = std::max(best, s);
  }
  return best;
}

int MultiPoly::degree_in(int var) const {
  require(var >= 0 && var < m_, ErrorKind::DimensionMismatch, "variable index out of range");
  int best = -1;
  for (const auto& [e, c] : terms_) best = std::max(best, int(e[var]));
  return best;
}

int MultiPoly::max_individual_degree() const {
  int best = -1;
  for (const auto& [e, c] : terms_)
    for (auto x : e) best = std::max(best, int(x));
  return terms_.empty() ? -1 : std::max(best, 0);
}

Residue MultiPoly::evaluate(std::span<const Residue> point) const {
  require(int(point.size()) == m_, ErrorKind::DimensionMismatch,
          "point has " + std::to_string(point.size()) + " coordinates, polynomial has " + std::to_string(m_) + " variables");
  std::vector<Residue> subs(point.begin(), point.end());
  for (auto& x : subs) x %= f_.modulus();
  return horner<Residue>(terms_.begin(), terms_.end(), 0, m_, subs, ResidueRing{f_});
}

MultiPoly MultiPoly::scaled(Residue c) const {
  MultiPoly out(f_, m_);
  c %= f_.modulus();
  if (c == 0) return out;
  for (const auto& [e, v] : terms_) out.terms_.emplace_hint(out.terms_.end(), e, f_.mul(v, c));
  return out;
}

static void check_compatible(const MultiPoly& a, const MultiPoly& b) {
  if (!(a.field() == b.field())) fail(ErrorKind::FieldMismatch, "polynomials over different fields");
  require(a.num_vars() == b.num_vars(), ErrorKind::DimensionMismatch, "polynomials in different variable counts");
}

MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) {
  check_compatible(a, b);
  MultiPoly out = a;
  for (const auto& [e, c] : b.terms_) out.add_term(e, c);
  return out;
}

MultiPoly operator-(const MultiPoly& a, const MultiPoly& b) {
  check_compatible(a, b);
  MultiPoly out = a;
  for (const auto& [e, c] : b.terms_) out.add_term(e, a.f_.neg(c));
  return out;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
  check_compatible(a, b);
  MultiPoly out(a.f_, a.m_);
  Exponents e(a.m_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (int i = 0; i < a.m_; ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, a.f_.mul(ca, cb));
    }
  }
  return out;
}

// ---------------------------------------------------------------- UniPoly

UniPoly::UniPoly(const FieldParams& f, std::vector<Residue> coeffs) : f_(f), c_(std::move(coeffs)) {
  for (auto& x : c_) x %= f_.modulus();
  trim();
}

void UniPoly::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

Residue UniPoly::evaluate(Residue t) const {
  t %= f_.modulus();
  Residue acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = f_.add(f_.mul(acc, t), *it);
  return acc;
}

UniPoly operator+(const UniPoly& a, const UniPoly& b) {
  if (!(a.f_ == b.f_)) fail(ErrorKind::FieldMismatch, "polynomials over different fields");
  std::vector<Residue> c(std::max(a.c_.size(), b.c_.size()), 0);
  for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] = a.c_[i];
  for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] = a.f_.add(c[i], b.c_[i]);
  return UniPoly(a.f_, std::move(c));
}

UniPoly operator*(const UniPoly& a, const UniPoly& b) {
  if (!(a.f_ == b.f_)) fail(ErrorKind::FieldMismatch, "polynomials over different fields");
  if (a.c_.empty() || b.c_.empty()) return UniPoly(a.f_);
  std::vector<Residue> c(a.c_.size() + b.c_.size() - 1, 0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] = a.f_.add(c[i + j], a.f_.mul(a.c_[i], b.c_[j]));
  return UniPoly(a.f_, std::move(c));
}

// ---------------------------------------------------------------- BiPoly

BiPoly::BiPoly(const FieldParams& f, int bound) : f_(f), bound_(bound), c_(size_for(bound), 0) {
  require(bound >= 0, ErrorKind::InvalidInput, "negative degree bound");
}

int BiPoly::degree() const {
  for (int s = bound_; s >= 0; --s)
    for (int j = 0; j <= s; ++j)
      if (coeff(s - j, j)) return s;
  return -1;
}

Residue BiPoly::evaluate(Residue a, Residue b) const {
  std::vector<Residue> pa(bound_ + 1, 1), pb(bound_ + 1, 1);
  a %= f_.modulus();
  b %= f_.modulus();
  for (int k = 1; k <= bound_; ++k) {
    pa[k] = f_.mul(pa[k - 1], a);
    pb[k] = f_.mul(pb[k - 1], b);
  }
  Residue acc = 0;
  for (int s = 0; s <= bound_; ++s)
    for (int j = 0; j <= s; ++j) {
      const Residue c = coeff(s - j, j);
      if (c) acc = f_.add(acc, f_.mul(c, f_.mul(pa[s - j], pb[j])));
    }
  return acc;
}

BiPoly BiPoly::resized(int bound) const {
  require(degree() <= bound, ErrorKind::InvalidInput,
          "bivariate polynomial of degree " + std::to_string(degree()) + " exceeds bound " + std::to_string(bound));
  BiPoly out(f_, bound);
  const int top = std::min(bound, bound_);
  for (int s = 0; s <= top; ++s)
    for (int j = 0; j <= s; ++j) out.set(s - j, j, coeff(s - j, j));
  return out;
}

BiPoly operator+(const BiPoly& a, const BiPoly& b) {
  if (!(a.f_ == b.f_)) fail(ErrorKind::FieldMismatch, "polynomials over different fields");
  BiPoly out = a.bound_ >= b.bound_ ? a : b;
  const BiPoly& other = a.bound_ >= b.bound_ ? b : a;
  for (int s = 0; s <= other.bound_; ++s)
    for (int j = 0; j <= s; ++j) out.set(s - j, j, a.f_.add(out.coeff(s - j, j), other.coeff(s - j, j)));
  return out;
}

BiPoly operator*(const BiPoly& a, const BiPoly& b) {
  if (!(a.f_ == b.f_)) fail(ErrorKind::FieldMismatch, "polynomials over different fields");
  const int da = a.degree(), db = b.degree();
  if (da < 0 || db < 0) return BiPoly(a.f_, 0);
  BiPoly out(a.f_, da + db);
  const auto& f = a.f_;
  for (int s = 0; s <= da; ++s)
    for (int j = 0; j <= s; ++j) {
      const Residue ca = a.coeff(s - j, j);
      if (!ca) continue;
      for (int t = 0; t <= db; ++t)
        for (int l = 0; l <= t; ++l) {
          const Residue cb = b.coeff(t - l, l);
          if (!cb) continue;
          const int i = s - j + t - l, jj = j + l;
          out.set(i, jj, f.add(out.coeff(i, jj), f.mul(ca, cb)));
        }
    }
  return out;
}

bool operator==(const BiPoly& a, const BiPoly& b) {
  if (!(a.f_ == b.f_)) return false;
  const int top = std::max(a.bound_, b.bound_);
  for (int s = 0; s <= top; ++s)
    for (int j = 0; j <= s; ++j) {
      const Residue x = s <= a.bound_ ? a.coeff(s - j, j) : 0;
      const Residue y = s <= b.bound_ ? b.coeff(s - j, j) : 0;
      if (x != y) return false;
    }
  return true;
}

MultiPoly BiPoly::to_multi() const {
  MultiPoly p(f_, 2);
  for (int s = 0; s <= bound_; ++s)
    for (int j = 0; j <= s; ++j) p.add_term({std::uint32_t(s - j), std::uint32_t(j)}, coeff(s - j, j));
  return p;
}

BiPoly BiPoly::from_multi(const MultiPoly& p, int bound) {
  require(p.num_vars() == 2, ErrorKind::DimensionMismatch, "expected a bivariate polynomial");
  require(p.total_degree() <= bound, ErrorKind::InvalidInput, "bivariate polynomial exceeds degree bound");
  BiPoly out(p.field(), bound);
  for (const auto& [e, c] : p.terms()) out.set(int(e[0]), int(e[1]), c);
  return out;
}

BiPoly BiPoly::from_raw(const FieldParams& f, int bound, std::vector<Residue> raw) {
  require(raw.size() == size_for(bound), ErrorKind::InvalidInput, "coefficient count does not match degree bound");
  BiPoly out(f, bound);
  for (auto& x : raw) require(x < f.modulus(), ErrorKind::InvalidInput, "coefficient out of range");
  out.c_ = std::move(raw);
  return out;
}

// ---------------------------------------------------------------- affine geometry

Point AffineSubspace::point_at(std::span<const Residue> coords) const {
  require(int(coords.size()) == dim(), ErrorKind::DimensionMismatch, "coordinate count differs from subspace dimension");
  Point x = base;
  for (int i = 0; i < dim(); ++i) {
    const Residue a = coords[i] % field.modulus();
    if (!a) continue;
    for (int j = 0; j < ambient; ++j) x[j] = field.add(x[j], field.mul(a, directions[i][j]));
  }
  return x;
}

namespace {

// Reduced row echelon form in place; returns pivot columns of the nonzero rows
// (zero rows are dropped).
std::vector<int> rref(const FieldParams& f, std::vector<Point>& rows, int cols) {
  std::vector<int> piv;
  std::size_t r = 0;
  for (int c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t sel = r;
    while (sel < rows.size() && rows[sel][c] == 0) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[r], rows[sel]);
    const Residue inv = f.inv(rows[r][c]);
    for (auto& x : rows[r]) x = f.mul(x, inv);
    for (std::size_t o = 0; o < rows.size(); ++o) {
      if (o == r || rows[o][c] == 0) continue;
      const Residue factor = rows[o][c];
      for (int k = 0; k < cols; ++k) rows[o][k] = f.sub(rows[o][k], f.mul(factor, rows[r][k]));
    }
    piv.push_back(c);
    ++r;
  }
  rows.resize(r);
  return piv;
}

}  // namespace

int rank_of(const FieldParams& f, const std::vector<Point>& vectors) {
  if (vectors.empty()) return 0;
  auto rows = vectors;
  return int(rref(f, rows, int(rows[0].size())).size());
}

AffineSubspace canonicalize(const AffineSubspace& s) {
  require(int(s.base.size()) == s.ambient, ErrorKind::DimensionMismatch, "base point length differs from ambient dimension");
  for (const auto& y : s.directions)
    require(int(y.size()) == s.ambient, ErrorKind::DimensionMismatch, "direction length differs from ambient dimension");
  AffineSubspace out = s;
  const auto piv = rref(s.field, out.directions, s.ambient);
  require(piv.size() == s.directions.size(), ErrorKind::InvalidInput, "subspace directions are linearly dependent");
  const auto& f = s.field;
  for (std::size_t i = 0; i < piv.size(); ++i) {
    const Residue factor = out.base[piv[i]];
    if (!factor) continue;
    for (int k = 0; k < s.ambient; ++k) out.base[k] = f.sub(out.base[k], f.mul(factor, out.directions[i][k]));
  }
  out.canonical = true;
  return out;
}

std::vector<int> pivots(const AffineSubspace& canonical) {
  std::vector<int> piv;
  for (const auto& y : canonical.directions) {
    int c = 0;
    while (c < canonical.ambient && y[c] == 0) ++c;
    require(c < canonical.ambient, ErrorKind::InvalidInput, "zero direction");
    piv.push_back(c);
  }
  return piv;
}

Point coordinates_of(const AffineSubspace& canonical, std::span<const Residue> x) {
  require(canonical.canonical, ErrorKind::InvalidInput, "coordinates need a canonical subspace");
  require(int(x.size()) == canonical.ambient, ErrorKind::DimensionMismatch, "point length differs from ambient dimension");
  const auto piv = pivots(canonical);
  Point alpha(piv.size());
  for (std::size_t i = 0; i < piv.size(); ++i) alpha[i] = canonical.field.sub(x[piv[i]], canonical.base[piv[i]]);
  const Point back = canonical.point_at(alpha);
  require(std::equal(back.begin(), back.end(), x.begin()), ErrorKind::InvalidInput, "point is not on the subspace");
  return alpha;
}

SubspaceDraw sample_subspace(const FieldParams& f, int m, int k, Rng& rng) {
  require(k >= 0 && k <= m, ErrorKind::InvalidInput, "subspace dimension exceeds ambient dimension");
  AffineSubspace s{f, m, Point(m), std::vector<Point>(k, Point(m)), false};
  for (auto& x : s.base) x = f.sample(rng);
  for (auto& y : s.directions)
    for (auto& x : y) x = f.sample(rng);
  if (rank_of(f, s.directions) < k) return {s, true};
  return {canonicalize(s), false};
}

std::vector<Point> enumerate_points(const AffineSubspace& s, std::uint64_t cap) {
  const std::uint64_t count = checked_power(s.field.modulus(), s.dim(), cap);
  std::vector<Point> out;
  out.reserve(count);
  Point alpha(s.dim(), 0);
  do out.push_back(s.point_at(alpha));
  while (advance(alpha, s.field.modulus()));
  return out;
}

std::vector<Point> enumerate_space(const FieldParams& f, int m, std::uint64_t cap) {
  const std::uint64_t count = checked_power(f.modulus(), m, cap);
  std::vector<Point> out;
  out.reserve(count);
  Point x(m, 0);
  do out.push_back(x);
  while (advance(x, f.modulus()));
  return out;
}

MultiPoly restrict_to_subspace(const MultiPoly& p, const AffineSubspace& s) {
  require(p.num_vars() == s.ambient, ErrorKind::DimensionMismatch, "polynomial and subspace dimensions differ");
  if (!(p.field() == s.field)) fail(ErrorKind::FieldMismatch, "polynomial and subspace over different fields");
  const int k = s.dim();
  std::vector<MultiPoly> subs;
  subs.reserve(s.ambient);
  for (int i = 0; i < s.ambient; ++i) {
    MultiPoly v = MultiPoly::constant(s.field, k, s.base[i]);
    for (int j = 0; j < k; ++j) {
      Exponents e(k, 0);
      e[j] = 1;
      v.add_term(e, s.directions[j][i]);
    }
    subs.push_back(std::move(v));
  }
  return horner<MultiPoly>(p.terms().begin(), p.terms().end(), 0, p.num_vars(), subs, MultiRing{s.field, k});
}

BiPoly restrict_to_plane(const MultiPoly& p, const AffineSubspace& plane, int bound) {
  require(plane.dim() == 2, ErrorKind::DimensionMismatch, "expected a plane");
  require(p.num_vars() == plane.ambient, ErrorKind::DimensionMismatch, "polynomial and plane dimensions differ");
  if (!(p.field() == plane.field)) fail(ErrorKind::FieldMismatch, "polynomial and plane over different fields");
  std::vector<BiPoly> subs;
  subs.reserve(plane.ambient);
  for (int i = 0; i < plane.ambient; ++i) {
    BiPoly v(plane.field, 1);
    v.set(0, 0, plane.base[i]);
    v.set(1, 0, plane.directions[0][i]);
    v.set(0, 1, plane.directions[1][i]);
    subs.push_back(std::move(v));
  }
  return horner<BiPoly>(p.terms().begin(), p.terms().end(), 0, p.num_vars(), subs, BiRing{plane.field}).resized(bound);
}

// ---------------------------------------------------------------- interpolation

MultiPoly low_degree_extension(const FieldParams& f, std::span<const Residue> values, int h, int m) {
  require(h >= 0 && m >= 0, ErrorKind::InvalidInput, "negative grid parameters");
  require(std::uint64_t(h) + 1 <= f.modulus(), ErrorKind::InvalidInput,
          "field of size " + std::to_string(f.modulus()) + " too small for grid {0.." + std::to_string(h) + "}");
  const std::uint64_t side = std::uint64_t(h) + 1;
  const std::uint64_t total = checked_power(side, m, std::uint64_t(1) << 26);
  require(values.size() == total, ErrorKind::InvalidInput,
          "grid incomplete: " + std::to_string(values.size()) + " of " + std::to_string(total) + " values");
  std::vector<Residue> t(values.begin(), values.end());
  for (auto& x : t) x %= f.modulus();
  const auto basis = lagrange_basis(f, int(side));
  std::vector<Residue> line(side), out(side);
  std::uint64_t stride = 1;
  for (int axis = 0; axis < m; ++axis, stride *= side) {
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      if ((idx / stride) % side != 0) continue;
      for (std::uint64_t j = 0; j < side; ++j) line[j] = t[idx + j * stride];
      std::fill(out.begin(), out.end(), 0);
      for (std::uint64_t j = 0; j < side; ++j) {
        if (!line[j]) continue;
        const auto& row = basis[j];
        for (std::size_t e = 0; e < row.size(); ++e) out[e] = f.add(out[e], f.mul(line[j], row[e]));
      }
      for (std::uint64_t e = 0; e < side; ++e) t[idx + e * stride] = out[e];
    }
  }
  MultiPoly p(f, m);
  Exponents e(m);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    if (!t[idx]) continue;
    std::uint64_t rest = idx;
    for (int i = 0; i < m; ++i) {
      e[i] = std::uint32_t(rest % side);
      rest /= side;
    }
    p.add_term(e, t[idx]);
  }
  return p;
}

MultiPoly low_degree_extension(const FieldParams& f, const std::map<Point, Residue>& values, int h, int m) {
  require(h >= 0 && m >= 0, ErrorKind::InvalidInput, "negative grid parameters");
  const std::uint64_t side = std::uint64_t(h) + 1;
  const std::uint64_t total = checked_power(side, m, std::uint64_t(1) << 26);
  std::vector<Residue> flat(total);
  std::vector<bool> seen(total, false);
  for (const auto& [x, v] : values) {
    require(int(x.size()) == m, ErrorKind::DimensionMismatch, "grid point of wrong length");
    std::uint64_t idx = 0;
    for (int i = m - 1; i >= 0; --i) {
      require(x[i] <= std::uint64_t(h), ErrorKind::InvalidInput, "point outside the grid");
      idx = idx * side + x[i];
    }
    flat[idx] = v;
    seen[idx] = true;
  }
  require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }), ErrorKind::InvalidInput, "grid incomplete");
  return low_degree_extension(f, std::span<const Residue>(flat), h, m);
}

int sharp_levels(int d) {
  require(d >= 0, ErrorKind::InvalidInput, "negative degree");
  int t = 0;
  while ((std::int64_t(1) << t) < std::int64_t(d) + 1) ++t;
  return t;
}

Point sharp_apply_univariate(const FieldParams& f, int d, Residue t) {
  const int levels = sharp_levels(d);
  Point out(levels);
  Residue x = t % f.modulus();
  for (int i = 0; i < levels; ++i) {
    out[i] = x;
    x = f.mul(x, x);
  }
  return out;
}

Point sharp_apply(const FieldParams& f, int d, Residue x, Residue y) {
  Point out = sharp_apply_univariate(f, d, x);
  const Point py = sharp_apply_univariate(f, d, y);
  out.insert(out.end(), py.begin(), py.end());
  return out;
}

MultiPoly substitute_vars(const MultiPoly& g, int d) {
  require(g.num_vars() == 2, ErrorKind::DimensionMismatch, "substitution expects a bivariate polynomial");
  require(g.total_degree() <= d, ErrorKind::InvalidInput,
          "degree " + std::to_string(g.total_degree()) + " exceeds " + std::to_string(d));
  const int t = sharp_levels(d);
  MultiPoly out(g.field(), 2 * t);
  Exponents e(2 * t);
  for (const auto& [ex, c] : g.terms()) {
    for (int i = 0; i < t; ++i) {
      e[i] = (ex[0] >> i) & 1;
      e[t + i] = (ex[1] >> i) & 1;
    }
    out.add_term(e, c);
  }
  return out;
}

MultiPoly substitute_vars_univariate(const UniPoly& g, int d) {
  require(g.degree() <= d, ErrorKind::InvalidInput,
          "degree " + std::to_string(g.degree()) + " exceeds " + std::to_string(d));
  const int t = sharp_levels(d);
  MultiPoly out(g.field(), t);
  Exponents e(t);
  for (std::size_t k = 0; k < g.coeffs().size(); ++k) {
    for (int i = 0; i < t; ++i) e[i] = (k >> i) & 1;
    out.add_term(e, g.coeffs()[k]);
  }
  return out;
}

Point Curve4::at(Residue t) const {
  Point x(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) x[i] = coords[i].evaluate(t);
  return x;
}

Curve4 curve_through(const FieldParams& f, std::span<const Point> points) {
  require(f.modulus() >= 4, ErrorKind::InvalidInput, "curve interpolation needs a field with at least 4 elements");
  require(points.size() == 4, ErrorKind::InvalidInput, "a curve is interpolated through exactly 4 points");
  const std::size_t m = points[0].size();
  for (const auto& p : points) require(p.size() == m, ErrorKind::DimensionMismatch, "curve points of different lengths");
  const auto basis = lagrange_basis(f, 4);
  Curve4 c{f, {}};
  c.coords.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<Residue> coef(4, 0);
    for (int i = 0; i < 4; ++i) {
      const Residue v = points[i][j] % f.modulus();
      for (int e = 0; e < 4; ++e) coef[e] = f.add(coef[e], f.mul(v, basis[i][e]));
    }
    c.coords.emplace_back(f, std::move(coef));
  }
  return c;
}

UniPoly restrict_to_curve(const MultiPoly& p, const Curve4& c) {
  require(p.num_vars() == c.ambient(), ErrorKind::DimensionMismatch, "polynomial and curve dimensions differ");
  if (!(p.field() == c.field)) fail(ErrorKind::FieldMismatch, "polynomial and curve over different fields");
  for (const auto& u : c.coords) require(u.degree() <= 4, ErrorKind::InvalidInput, "curve coordinate exceeds degree 4");
  return horner<UniPoly>(p.terms().begin(), p.terms().end(), 0, p.num_vars(), c.coords, UniRing{c.field});
}

Rational zero_fraction(const MultiPoly& p, std::uint64_t trials, Rng& rng) {
  require(!p.is_zero(), ErrorKind::InvalidInput, "zero fraction of the zero polynomial");
  require(trials > 0, ErrorKind::InvalidInput, "no trials");
  const auto& f = p.field();
  Point x(p.num_vars());
  std::int64_t zeros = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    for (auto& v : x) v = f.sample(rng);
    zeros += p.evaluate(x) == 0;
  }
  return Rational(zeros, std::int64_t(trials));
}

Rational zero_fraction_exhaustive(const MultiPoly& p, std::uint64_t cap) {
  require(!p.is_zero(), ErrorKind::InvalidInput, "zero fraction of the zero polynomial");
  const auto& f = p.field();
  const std::uint64_t total = checked_power(f.modulus(), p.num_vars(), cap);
  Point x(p.num_vars(), 0);
  std::int64_t zeros = 0;
  do zeros += p.evaluate(x) == 0;
  while (advance(x, f.modulus()));
  return Rational(zeros, std::int64_t(total));
}

// ---------------------------------------------------------------- text format

std::string to_text(const MultiPoly& p) {
  std::ostringstream os;
  os << "p " << p.field().modulus() << " m " << p.num_vars() << '\n';
  for (const auto& [e, c] : p.terms()) {
    os << c;
    for (auto x : e) os << ' ' << x;
    os << '\n';
  }
  return os.str();
}

MultiPoly poly_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tp, tm;
  std::uint64_t modulus = 0;
  long long m = -1;
  if (!(in >> tp >> modulus >> tm >> m) || tp != "p" || tm != "m" || m < 0)
    fail(ErrorKind::InvalidInput, "polynomial text must start with 'p <modulus> m <vars>'");
  const FieldParams f = make_field(modulus);
  MultiPoly p(f, int(m));
  Exponents e(m);
  std::uint64_t c;
  while (in >> c) {
    require(c < modulus, ErrorKind::InvalidInput, "coefficient out of range");
    for (auto& x : e) {
      long long v;
      if (!(in >> v) || v < 0 || v > UINT32_MAX) fail(ErrorKind::InvalidInput, "malformed exponent in polynomial text");
      x = std::uint32_t(v);
    }
    p.add_term(e, c);
  }
  if (!in.eof()) fail(ErrorKind::InvalidInput, "trailing garbage in polynomial text");
  return p;
}

}  // namespace nlg
