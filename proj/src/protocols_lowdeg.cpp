#include <algorithm>

#include "nlg/protocols.hpp"
#include "nlg/token.hpp"

namespace nlg {

void LowDegreeParams::validate() const {
  require(d >= 1, ErrorKind::InvalidInput, "degree must be at least 1");
  require(m >= 2, ErrorKind::InvalidInput, "need m >= 2");
  require(r >= 2, ErrorKind::InvalidInput, "need at least two players");
}

std::string point_token(const Point& x) { return residue_token("pt", x); }

std::string plane_token(const AffineSubspace& s) {
  Point v = s.base;
  for (const auto& y : s.directions) v.insert(v.end(), y.begin(), y.end());
  return residue_token("pl", v);
}

std::optional<Point> parse_point(const std::string& body, const FieldParams& f, int m) {
  auto v = parse_residues(body, f.modulus());
  if (!v || int(v->size()) != m) return std::nullopt;
  return *v;
}

std::optional<AffineSubspace> parse_plane(std::span<const Residue> v, const FieldParams& f, int m) {
  if (int(v.size()) != 3 * m) return std::nullopt;
  AffineSubspace s{f, m, Point(v.begin(), v.begin() + m), {}, false};
  s.directions.emplace_back(v.begin() + m, v.begin() + 2 * m);
  s.directions.emplace_back(v.begin() + 2 * m, v.end());
  if (rank_of(f, s.directions) < 2) return std::nullopt;
  AffineSubspace c = canonicalize(s);
  s.canonical = true;
  if (!(c == s)) return std::nullopt;
  return c;
}

std::string bipoly_token(const BiPoly& g) { return residue_token("", g.raw()).substr(1); }

std::optional<BiPoly> parse_bipoly(const std::string& s, const FieldParams& f, int bound) {
  auto v = parse_residues(s, f.modulus());
  if (!v || v->size() != BiPoly::size_for(bound)) return std::nullopt;
  return BiPoly::from_raw(f, bound, std::move(*v));
}

std::string unipoly_token(const UniPoly& g) {
  std::string out;
  for (std::size_t i = 0; i < g.coeffs().size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(g.coeffs()[i]);
  }
  return out.empty() ? "0" : out;
}

std::optional<UniPoly> parse_unipoly(const std::string& s, const FieldParams& f, int bound) {
  auto v = parse_residues(s, f.modulus());
  if (!v || int(v->size()) > bound + 1) return std::nullopt;
  return UniPoly(f, std::move(*v));
}

std::optional<Residue> parse_value(const std::string& s, const FieldParams& f) {
  auto v = parse_residues(s, f.modulus());
  if (!v || v->size() != 1) return std::nullopt;
  return (*v)[0];
}

namespace {

std::pair<int, int> player_pair(int r, Rng& rng) {
  const int i = int(rng.below(std::uint64_t(r)));
  int j = int(rng.below(std::uint64_t(r - 1)));
  if (j >= i) ++j;
  return {i, j};
}

std::vector<std::pair<int, int>> all_pairs(int r) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (i != j) out.emplace_back(i, j);
  return out;
}

std::uint64_t power_capped(std::uint64_t b, int e, std::uint64_t cap) {
  std::uint64_t v = 1;
  for (int i = 0; i < e; ++i) {
    require(v <= cap / b, ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
    v *= b;
  }
  return v;
}

bool advance(std::vector<Residue>& v, std::uint64_t q) {
  for (auto& x : v) {
    if (++x < q) return true;
    x = 0;
  }
  return false;
}

struct PlaneDraw {
  Point x;
  std::optional<AffineSubspace> plane;
};

PlaneDraw plane_from_flat(const FieldParams& f, int m, const std::vector<Residue>& v) {
  AffineSubspace s{f, m, Point(v.begin(), v.begin() + m), {}, false};
  s.directions.emplace_back(v.begin() + m, v.begin() + 2 * m);
  s.directions.emplace_back(v.begin() + 2 * m, v.end());
  PlaneDraw out;
  out.x = s.base;
  if (rank_of(f, s.directions) == 2) out.plane = canonicalize(s);
  return out;
}

PlaneDraw raw_plane(const FieldParams& f, int m, Rng& rng) {
  std::vector<Residue> v(3 * std::size_t(m));
  for (auto& x : v) x = f.sample(rng);
  return plane_from_flat(f, m, v);
}

// " r1 r2 ..." with a leading space, ready to append to a tag.
std::string plane_body(const AffineSubspace& s) { return plane_token(s).substr(2); }

std::vector<std::size_t> queried(std::span<const Token> qs) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < qs.size(); ++i)
    if (!qs[i].empty()) out.push_back(i);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- plane vs point

LdRound ld_round(const LowDegreeParams& p, Rng& rng) {
  LdRound out;
  PlaneDraw d = raw_plane(p.field, p.m, rng);
  out.x = d.x;
  out.auto_accept = !d.plane;
  if (d.plane) out.plane = *d.plane;
  std::tie(out.plane_player, out.point_player) = player_pair(p.r, rng);
  return out;
}

bool ld_check(const LowDegreeParams& p, const AffineSubspace& plane, const BiPoly& g, Residue a, const Point& x) {
  if (g.degree() > p.d) return false;
  Point c;
  try {
    c = coordinates_of(plane, x);
  } catch (const Error&) {
    return false;
  }
  return g.evaluate(c[0], c[1]) == a;
}

LowDegreeTest::LowDegreeTest(LowDegreeParams p) : p_(std::move(p)) { p_.validate(); }

Round LowDegreeTest::sample(Rng& rng) const {
  const LdRound lr = ld_round(p_, rng);
  Round round;
  round.questions.assign(p_.r, Token());
  if (lr.auto_accept) {
    round.auto_accept = true;
    return round;
  }
  round.questions[lr.plane_player] = plane_token(lr.plane);
  round.questions[lr.point_player] = point_token(lr.x);
  return round;
}

bool LowDegreeTest::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  const auto idx = queried(round.questions);
  if (idx.size() != 2 || answers.size() != round.questions.size()) return false;
  std::size_t ip = idx[0], ix = idx[1];
  if (round.questions[ip].rfind("pl", 0) != 0) std::swap(ip, ix);
  const auto pv = parse_tagged(round.questions[ip], "pl", p_.field.modulus(), 3 * p_.m);
  const auto xv = parse_tagged(round.questions[ix], "pt", p_.field.modulus(), p_.m);
  if (!pv || !xv) return false;
  const auto plane = parse_plane(*pv, p_.field, p_.m);
  const auto g = parse_bipoly(answers[ip], p_.field, p_.d);
  const auto a = parse_value(answers[ix], p_.field);
  if (!plane || !g || !a) return false;
  return ld_check(p_, *plane, *g, *a, *xv);
}

std::optional<std::vector<WeightedRound>> LowDegreeTest::enumerate(std::uint64_t cap) const {
  const std::uint64_t q = p_.field.modulus();
  const std::uint64_t total = power_capped(q, 3 * p_.m, cap * 100);
  std::map<std::pair<std::string, std::string>, std::int64_t> groups;
  std::int64_t dependent = 0;
  std::vector<Residue> v(3 * std::size_t(p_.m), 0);
  do {
    const PlaneDraw d = plane_from_flat(p_.field, p_.m, v);
    if (!d.plane) ++dependent;
    else ++groups[{plane_token(*d.plane), point_token(d.x)}];
  } while (advance(v, q));
  const auto pairs = all_pairs(p_.r);
  require(groups.size() * pairs.size() + 1 <= cap, ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
  std::vector<WeightedRound> out;
  if (dependent) {
    Round round;
    round.questions.assign(p_.r, Token());
    round.auto_accept = true;
    out.push_back({Rational(dependent, std::int64_t(total)), round});
  }
  for (const auto& [key, count] : groups)
    for (const auto& [i, j] : pairs) {
      Round round;
      round.questions.assign(p_.r, Token());
      round.questions[i] = key.first;
      round.questions[j] = key.second;
      out.push_back({Rational(count, std::int64_t(total)) * Rational(1, std::int64_t(pairs.size())), round});
    }
  return out;
}

namespace {

std::vector<Token> field_alphabet(const FieldParams& f, std::uint64_t cap) {
  require(f.modulus() <= cap, ErrorKind::TooLarge, "answer alphabet exceeds cap");
  std::vector<Token> out;
  for (std::uint64_t a = 0; a < f.modulus(); ++a) out.push_back(std::to_string(a));
  return out;
}

void append_bipolys(std::vector<Token>& out, const FieldParams& f, int bound, std::uint64_t cap) {
  const std::size_t k = BiPoly::size_for(bound);
  const std::uint64_t count = power_capped(f.modulus(), int(k), cap);
  require(out.size() + count <= cap, ErrorKind::TooLarge, "answer alphabet exceeds cap");
  std::vector<Residue> v(k, 0);
  do out.push_back(bipoly_token(BiPoly::from_raw(f, bound, v)));
  while (advance(v, f.modulus()));
}

}  // namespace

std::optional<std::vector<Token>> LowDegreeTest::answer_alphabet(std::uint64_t cap) const {
  auto out = field_alphabet(p_.field, cap);
  append_bipolys(out, p_.field, p_.d, cap);
  return out;
}

FunctionStrategy honest_ld_strategy(const LowDegreeParams& p, const MultiPoly& global) {
  require(global.num_vars() == p.m, ErrorKind::DimensionMismatch, "polynomial has the wrong number of variables");
  require(global.total_degree() <= p.d, ErrorKind::InvalidInput, "polynomial degree exceeds d");
  return FunctionStrategy([p, global](int, const Token& q, Rng&) -> Token {
    if (auto v = parse_tagged(q, "pl", p.field.modulus(), 3 * p.m)) {
      const auto plane = parse_plane(*v, p.field, p.m);
      if (plane) return bipoly_token(restrict_to_plane(global, *plane, p.d));
    }
    if (auto x = parse_tagged(q, "pt", p.field.modulus(), p.m)) return std::to_string(global.evaluate(*x));
    return "0";
  });
}

// ---------------------------------------------------------------- two-level

MultiPoly substituted_restriction(const MultiPoly& global, const AffineSubspace& plane, int d) {
  return substitute_vars(restrict_to_plane(global, plane, d).to_multi(), d);
}

TwoLevelTest::TwoLevelTest(LowDegreeParams p) : p_(std::move(p)) { p_.validate(); }

Round TwoLevelTest::sample_into(Rng& rng, int players) const {
  const PlaneDraw s = raw_plane(p_.field, p_.m, rng);
  const PlaneDraw s2 = raw_plane(p_.field, p_.d2(), rng);
  const auto [i, j] = player_pair(players, rng);
  const int sub = rng.bit() ? 2 : 1;
  Round round;
  round.questions.assign(players, Token());
  round.memo = sub;
  if (!s.plane || !s2.plane) {
    round.auto_accept = true;
    return round;
  }
  const std::string sb = plane_body(*s.plane);
  if (sub == 1) {
    const Point c = coordinates_of(*s.plane, s.x);
    round.questions[i] = point_token(s.x);
    round.questions[j] = residue_token("sx" + sb, sharp_apply(p_.field, p_.d, c[0], c[1]));
  } else {
    round.questions[i] = "ss" + sb + plane_body(*s2.plane);
    round.questions[j] = residue_token("sx" + sb, s2.x);
  }
  return round;
}

Round TwoLevelTest::sample(Rng& rng) const { return sample_into(rng, p_.r); }

bool TwoLevelTest::check(std::span<const Token> questions, std::span<const Token> answers) const {
  const auto idx = queried(questions);
  if (idx.size() != 2 || answers.size() != questions.size()) return false;
  const std::uint64_t q = p_.field.modulus();
  const int m = p_.m, m2 = p_.d2();
  std::size_t ia = idx[0], ib = idx[1];  // ib gets the "sx" question
  if (questions[ia].rfind("sx", 0) == 0) std::swap(ia, ib);
  const auto sx = parse_tagged(questions[ib], "sx", q, 3 * m + m2);
  if (!sx) return false;
  const auto a2 = parse_value(answers[ib], p_.field);
  if (!a2) return false;
  const std::span<const Residue> sxv(*sx);
  if (!parse_plane(sxv.first(3 * m), p_.field, m)) return false;
  if (auto x = parse_tagged(questions[ia], "pt", q, m)) {
    const auto a = parse_value(answers[ia], p_.field);
    return a && *a == *a2;
  }
  const auto ss = parse_tagged(questions[ia], "ss", q, 3 * m + 3 * m2);
  if (!ss || !std::equal(sxv.begin(), sxv.begin() + 3 * m, ss->begin())) return false;
  const auto s2 = parse_plane(std::span<const Residue>(*ss).subspan(3 * m), p_.field, m2);
  const auto g = parse_bipoly(answers[ia], p_.field, p_.d2());
  if (!s2 || !g) return false;
  return ld_check({p_.field, p_.d2(), m2, p_.r}, *s2, *g, *a2, Point(sxv.begin() + 3 * m, sxv.end()));
}

bool TwoLevelTest::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  return check(round.questions, answers);
}

std::optional<std::vector<WeightedRound>> TwoLevelTest::enumerate(std::uint64_t cap) const {
  const std::uint64_t q = p_.field.modulus();
  const int m = p_.m, m2 = p_.d2();
  const std::uint64_t ta = power_capped(q, 3 * m, cap * 100), tb = power_capped(q, 3 * m2, cap * 100);
  std::map<std::pair<std::string, std::string>, std::int64_t> first;  // (pt x, sx s #x)
  std::map<std::string, std::int64_t> planes;
  std::map<std::pair<std::string, std::string>, std::int64_t> second;  // (plane', x')
  std::int64_t indep_a = 0, indep_b = 0;
  std::vector<Residue> v(3 * std::size_t(m), 0);
  do {
    const PlaneDraw d = plane_from_flat(p_.field, m, v);
    if (!d.plane) continue;
    ++indep_a;
    const std::string sb = plane_body(*d.plane);
    const Point c = coordinates_of(*d.plane, d.x);
    ++first[{point_token(d.x), residue_token("sx" + sb, sharp_apply(p_.field, p_.d, c[0], c[1]))}];
    ++planes[sb];
  } while (advance(v, q));
  v.assign(3 * std::size_t(m2), 0);
  do {
    const PlaneDraw d = plane_from_flat(p_.field, m2, v);
    if (!d.plane) continue;
    ++indep_b;
    ++second[{plane_body(*d.plane), residue_token("", d.x)}];
  } while (advance(v, q));
  const auto pairs = all_pairs(p_.r);
  require((first.size() + planes.size() * second.size()) * pairs.size() + 1 <= cap, ErrorKind::TooLarge,
          "enumeration exceeds cap " + std::to_string(cap));
  const Rational pa(indep_a, std::int64_t(ta)), pb(indep_b, std::int64_t(tb));
  const Rational each = Rational(1, 2) * Rational(1, std::int64_t(pairs.size()));
  std::vector<WeightedRound> out;
  if (pa * pb != Rational(1)) {
    Round round;
    round.questions.assign(p_.r, Token());
    round.auto_accept = true;
    out.push_back({Rational(1) - pa * pb, round});
  }
  for (const auto& [key, count] : first)
    for (const auto& [i, j] : pairs) {
      Round round;
      round.questions.assign(p_.r, Token());
      round.questions[i] = key.first;
      round.questions[j] = key.second;
      round.memo = 1;
      out.push_back({Rational(count, std::int64_t(ta)) * pb * each, round});
    }
  for (const auto& [sb, cs] : planes)
    for (const auto& [key, c2] : second)
      for (const auto& [i, j] : pairs) {
        Round round;
        round.questions.assign(p_.r, Token());
        round.questions[i] = "ss" + sb + key.first;
        round.questions[j] = "sx" + sb + key.second;
        round.memo = 2;
        out.push_back({Rational(cs, std::int64_t(ta)) * Rational(c2, std::int64_t(tb)) * each, round});
      }
  return out;
}

std::optional<std::vector<Token>> TwoLevelTest::answer_alphabet(std::uint64_t cap) const {
  auto out = field_alphabet(p_.field, cap);
  append_bipolys(out, p_.field, p_.d2(), cap);
  return out;
}

FunctionStrategy honest_twolevel_strategy(const LowDegreeParams& p, const MultiPoly& global) {
  require(global.num_vars() == p.m, ErrorKind::DimensionMismatch, "polynomial has the wrong number of variables");
  require(global.total_degree() <= p.d, ErrorKind::InvalidInput, "polynomial degree exceeds d");
  const std::uint64_t q = p.field.modulus();
  const int m = p.m, m2 = p.d2();
  return FunctionStrategy([=](int, const Token& t, Rng&) -> Token {
    if (auto x = parse_tagged(t, "pt", q, m)) return std::to_string(global.evaluate(*x));
    if (auto v = parse_tagged(t, "sx", q, 3 * m + m2)) {
      const std::span<const Residue> s(*v);
      if (auto plane = parse_plane(s.first(3 * m), p.field, m))
        return std::to_string(substituted_restriction(global, *plane, p.d).evaluate(s.subspan(3 * m)));
    }
    if (auto v = parse_tagged(t, "ss", q, 3 * m + 3 * m2)) {
      const std::span<const Residue> s(*v);
      auto plane = parse_plane(s.first(3 * m), p.field, m);
      auto plane2 = parse_plane(s.subspan(3 * m), p.field, m2);
      if (plane && plane2)
        return bipoly_token(restrict_to_plane(substituted_restriction(global, *plane, p.d), *plane2, m2));
    }
    return "0";
  });
}

std::pair<std::map<Token, Rational>, std::map<Token, Rational>> twolevel_second_player_marginals(
    const LowDegreeParams& p, std::uint64_t cap) {
  const TwoLevelTest test(p);
  std::map<Token, Rational> m1, m2;
  Rational t1, t2;
  const auto rounds = test.enumerate(cap);
  for (const auto& [w, round] : *rounds) {
    if (round.auto_accept) continue;
    const int sub = std::any_cast<int>(round.memo);
    for (const auto& qtok : round.questions)
      if (qtok.rfind("sx", 0) == 0) {
        (sub == 1 ? m1 : m2)[qtok] += w;
        (sub == 1 ? t1 : t2) += w;
      }
  }
  for (auto& [k, w] : m1) w = w / t1;
  for (auto& [k, w] : m2) w = w / t2;
  return {m1, m2};
}

}  // namespace nlg
