#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "nlg/protocols.hpp"
#include "nlg/token.hpp"

namespace nlg {

// ---------------------------------------------------------------- CNF

void Cnf::validate() const {
  require(n >= 1, ErrorKind::InvalidInput, "formula needs at least one variable");
  for (const auto& c : clauses)
    for (int lit : c)
      require(lit != 0 && std::abs(lit) <= n, ErrorKind::InvalidInput,
              "literal " + std::to_string(lit) + " outside 1.." + std::to_string(n));
}

bool Cnf::satisfied(const std::vector<bool>& assignment, std::size_t clause) const {
  for (int lit : clauses.at(clause))
    if (assignment.at(std::size_t(std::abs(lit) - 1)) == (lit > 0)) return true;
  return false;
}

double Cnf::violated_fraction(const std::vector<bool>& assignment) const {
  require(!clauses.empty(), ErrorKind::InvalidInput, "formula has no clauses");
  std::size_t bad = 0;
  for (std::size_t k = 0; k < clauses.size(); ++k) bad += !satisfied(assignment, k);
  return double(bad) / double(clauses.size());
}

Cnf read_dimacs(std::istream& in) {
  Cnf cnf;
  long declared = -1;
  std::vector<int> cur;
  std::string line;
  int lineno = 0;
  bool done = false;
  while (!done && std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first == "c") continue;
    if (first == "%") break;
    if (first == "p") {
      std::string fmt;
      long nv = -1, nc = -1;
      require(bool(ls >> fmt >> nv >> nc) && fmt == "cnf" && nv >= 1 && nc >= 0, ErrorKind::InvalidInput,
              "line " + std::to_string(lineno) + ": malformed problem line");
      require(declared < 0, ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": second problem line");
      cnf.n = int(nv);
      declared = nc;
      continue;
    }
    require(declared >= 0, ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": clause before the problem line");
    std::istringstream all(line);
    std::string tok;
    while (all >> tok) {
      long lit;
      try {
        std::size_t used = 0;
        lit = std::stol(tok, &used);
        require(used == tok.size(), ErrorKind::InvalidInput, "");
      } catch (...) {
        fail(ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": bad literal '" + tok + "'");
      }
      if (lit == 0) {
        require(!cur.empty(), ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": empty clause");
        require(cur.size() <= 3, ErrorKind::InvalidInput, "line " + std::to_string(lineno) + ": clause has more than 3 literals");
        while (cur.size() < 3) cur.push_back(cur.back());
        cnf.clauses.push_back({cur[0], cur[1], cur[2]});
        cur.clear();
      } else {
        require(std::abs(lit) <= cnf.n, ErrorKind::InvalidInput,
                "line " + std::to_string(lineno) + ": literal " + tok + " exceeds the declared variable count");
        cur.push_back(int(lit));
      }
    }
  }
  require(declared >= 0, ErrorKind::InvalidInput, "missing problem line");
  require(cur.empty(), ErrorKind::InvalidInput, "last clause is not terminated by 0");
  require(long(cnf.clauses.size()) == declared, ErrorKind::InvalidInput,
          "declared " + std::to_string(declared) + " clauses, found " + std::to_string(cnf.clauses.size()));
  cnf.validate();
  return cnf;
}

Cnf parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return read_dimacs(in);
}

void write_dimacs(std::ostream& out, const Cnf& cnf) {
  out << "p cnf " << cnf.n << ' ' << cnf.clauses.size() << '\n';
  for (const auto& c : cnf.clauses) out << c[0] << ' ' << c[1] << ' ' << c[2] << " 0\n";
}

// ---------------------------------------------------------------- parameters

SatTestParams sat_params(int n, const FieldParams& f) {
  require(n >= 3, ErrorKind::InvalidInput, "the 3-SAT test needs n >= 3");
  SatTestParams p;
  p.n = n;
  p.field = f;
  while ((std::int64_t(1) << p.h) < n) ++p.h;
  const double l = std::log2(double(n));
  p.m = int(std::ceil(l / std::log2(l) - 1e-9));
  // Guard the floating-point ceiling; the grid must hold every variable.
  auto fits = [&] {
    std::int64_t cells = 1;
    for (int i = 0; i < p.m && cells < n; ++i) cells *= p.h + 1;
    return cells >= n;
  };
  while (!fits()) ++p.m;
  p.d = p.m * p.h;
  p.d2 = sharp_levels(4 * p.d);
  require(f.modulus() >= std::uint64_t(p.h) + 1, ErrorKind::InvalidInput,
          "field size " + std::to_string(f.modulus()) + " below h + 1 = " + std::to_string(p.h + 1));
  require(f.modulus() >= 4, ErrorKind::InvalidInput, "curves need a field with at least 4 elements");
  return p;
}

Point variable_point(const SatTestParams& p, int var) {
  require(var >= 1 && var <= p.n, ErrorKind::InvalidInput, "variable out of range");
  Point x(p.m);
  std::int64_t k = var - 1;
  for (int i = 0; i < p.m; ++i, k /= p.h + 1) x[i] = Residue(k % (p.h + 1));
  return x;
}

MultiPoly assignment_lde(const SatTestParams& p, const std::vector<bool>& assignment) {
  require(int(assignment.size()) == p.n, ErrorKind::DimensionMismatch, "assignment length differs from n");
  std::size_t cells = 1;
  for (int i = 0; i < p.m; ++i) cells *= std::size_t(p.h + 1);
  std::vector<Residue> values(cells, 0);
  for (int i = 0; i < p.n; ++i) values[std::size_t(i)] = assignment[std::size_t(i)] ? 1 : 0;
  return low_degree_extension(p.field, values, p.h, p.m);
}

// ---------------------------------------------------------------- the test

namespace {

std::optional<Curve4> parse_curve(std::span<const Residue> v, const FieldParams& f, int m) {
  if (int(v.size()) != 4 * m) return std::nullopt;
  Curve4 c{f, {}};
  for (int i = 0; i < m; ++i) c.coords.emplace_back(f, std::vector<Residue>(v.begin() + 4 * i, v.begin() + 4 * i + 4));
  return c;
}

bool same_curve(const Curve4& a, const Curve4& b) {
  if (a.ambient() != b.ambient()) return false;
  for (int i = 0; i < a.ambient(); ++i)
    if (!(a.coords[i] == b.coords[i])) return false;
  return true;
}

std::pair<int, int> player_pair(int r, Rng& rng) {
  const int i = int(rng.below(std::uint64_t(r)));
  int j = int(rng.below(std::uint64_t(r - 1)));
  if (j >= i) ++j;
  return {i, j};
}

constexpr std::uint64_t kAny = std::numeric_limits<std::uint64_t>::max();

// Literal truth from a field value: 1 is true, 0 is false, anything else satisfies nothing.
bool literal_holds(int lit, Residue v) { return lit > 0 ? v == 1 : v == 0; }

}  // namespace

SatTest::SatTest(Cnf cnf, const FieldParams& f, int r)
    : cnf_(std::move(cnf)), p_(sat_params(cnf_.n, f)), r_(r), two_(p_.two_level(r)) {
  cnf_.validate();
  require(!cnf_.clauses.empty(), ErrorKind::InvalidInput, "formula has no clauses");
  require(r >= 2, ErrorKind::InvalidInput, "need at least two players");
}

Curve4 SatTest::clause_curve(std::size_t clause, const Point& w) const {
  const auto& c = cnf_.clauses.at(clause);
  const Point pts[4] = {variable_point(p_, std::abs(c[0])), variable_point(p_, std::abs(c[1])),
                        variable_point(p_, std::abs(c[2])), w};
  return curve_through(p_.field, pts);
}

Curve4 SatTest::sharp_curve(const Point& w2) const {
  const int dd = 4 * p_.d;
  const Point pts[4] = {sharp_apply_univariate(p_.field, dd, 0), sharp_apply_univariate(p_.field, dd, 1),
                        sharp_apply_univariate(p_.field, dd, 2), w2};
  return curve_through(p_.field, pts);
}

std::string SatTest::curve_token_body(const Curve4& c) const {
  std::vector<Residue> v;
  for (const auto& u : c.coords) {
    auto k = u.coeffs();
    k.resize(4, 0);
    v.insert(v.end(), k.begin(), k.end());
  }
  return residue_token("", v);
}

Round SatTest::sample(Rng& rng) const {
  if (!rng.bit()) {
    Round round = two_.sample_into(rng, r_);
    round.memo = 0;
    return round;
  }
  const std::size_t k = rng.below(cnf_.clauses.size());
  Point w(p_.m);
  for (auto& x : w) x = p_.field.sample(rng);
  const Curve4 c = clause_curve(k, w);
  const std::string cb = curve_token_body(c);
  Round round;
  round.questions.assign(r_, Token());
  if (!rng.bit()) {
    const auto [i, j] = player_pair(r_, rng);
    round.questions[i] = point_token(w);
    round.questions[j] = residue_token("cv" + cb, sharp_apply_univariate(p_.field, 4 * p_.d, 3));
    round.memo = 1;
  } else {
    Point w2(p_.d2);
    for (auto& x : w2) x = p_.field.sample(rng);
    const auto [i, j] = player_pair(r_, rng);
    round.questions[i] = residue_token("cv" + cb, w2);
    round.questions[j] = "cc" + cb + curve_token_body(sharp_curve(w2)) + " " + std::to_string(k);
    round.memo = 2;
  }
  return round;
}

bool SatTest::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  const auto& qs = round.questions;
  if (answers.size() != qs.size()) return false;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < qs.size(); ++i)
    if (!qs[i].empty()) idx.push_back(i);
  if (idx.size() != 2) return false;
  auto tagged = [&](const char* tag) -> long {
    for (std::size_t i : idx)
      if (qs[i].rfind(std::string(tag) + " ", 0) == 0) return long(i);
    return -1;
  };
  const std::uint64_t q = p_.field.modulus();
  const int m = p_.m, m2 = p_.d2;
  const long icc = tagged("cc"), icv = tagged("cv");
  if (icc >= 0) {
    if (icv < 0) return false;
    const auto cv = parse_tagged(qs[icv], "cv", q, 4 * m + m2);
    const auto cc = parse_tagged(qs[icc], "cc", kAny, 4 * m + 4 * m2 + 1);
    if (!cv || !cc) return false;
    const std::size_t k = (*cc)[4 * m + 4 * m2];
    if (k >= cnf_.clauses.size()) return false;
    for (int i = 0; i < 4 * m + 4 * m2; ++i)
      if ((*cc)[i] >= q) return false;
    const std::span<const Residue> cvs(*cv), ccs(*cc);
    const auto c = parse_curve(cvs.first(4 * m), p_.field, m);
    const auto c1 = parse_curve(ccs.first(4 * m), p_.field, m);
    const auto c2 = parse_curve(ccs.subspan(4 * m, 4 * m2), p_.field, m2);
    const Point w2(cvs.begin() + 4 * m, cvs.end());
    // The tokens must describe a round the referee could have sent.
    if (!same_curve(*c, *c1) || !same_curve(*c2, sharp_curve(w2)) || !same_curve(*c, clause_curve(k, c->at(3))))
      return false;
    const auto g = parse_unipoly(answers[icc], p_.field, 4 * m2);
    const auto a = parse_value(answers[icv], p_.field);
    if (!g || !a) return false;
    const auto& clause = cnf_.clauses[k];
    bool sat = false;
    for (int t = 0; t < 3; ++t) sat = sat || literal_holds(clause[t], g->evaluate(Residue(t)));
    return sat && g->evaluate(3) == *a;
  }
  if (icv >= 0) {
    const long ipt = tagged("pt");
    if (ipt < 0) return false;
    const auto cv = parse_tagged(qs[icv], "cv", q, 4 * m + m2);
    const auto pt = parse_tagged(qs[ipt], "pt", q, m);
    const auto a = parse_value(answers[ipt], p_.field);
    const auto a2 = parse_value(answers[icv], p_.field);
    return cv && pt && a && a2 && *a == *a2;
  }
  return two_.check(qs, answers);
}

std::optional<std::vector<WeightedRound>> SatTest::enumerate(std::uint64_t cap) const {
  const std::uint64_t q = p_.field.modulus();
  auto power = [&](int e) {
    std::uint64_t v = 1;
    for (int i = 0; i < e; ++i) {
      require(v <= cap / q, ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
      v *= q;
    }
    return v;
  };
  const std::uint64_t pairs = std::uint64_t(r_) * std::uint64_t(r_ - 1);
  const std::uint64_t nw = power(p_.m), nw2 = power(p_.d2);
  require(cnf_.clauses.size() * nw * (1 + nw2) * pairs <= cap, ErrorKind::TooLarge,
          "enumeration exceeds cap " + std::to_string(cap));
  auto base = two_.enumerate(cap);
  std::vector<WeightedRound> out;
  for (auto& wr : *base) {
    wr.weight *= Rational(1, 2);
    wr.round.memo = 0;
    out.push_back(std::move(wr));
  }
  const Rational pc(1, 2 * std::int64_t(cnf_.clauses.size()));
  const Rational per_pair(1, std::int64_t(pairs));
  const Point sharp3 = sharp_apply_univariate(p_.field, 4 * p_.d, 3);
  Point w(p_.m, 0);
  auto next = [q](Point& v) {
    for (auto& x : v) {
      if (++x < q) return true;
      x = 0;
    }
    return false;
  };
  for (std::size_t k = 0; k < cnf_.clauses.size(); ++k) {
    std::fill(w.begin(), w.end(), 0);
    do {
      const Curve4 c = clause_curve(k, w);
      const std::string cb = curve_token_body(c);
      const Rational pw = pc * Rational(1, std::int64_t(nw)) * Rational(1, 2) * per_pair;
      for (int i = 0; i < r_; ++i)
        for (int j = 0; j < r_; ++j) {
          if (i == j) continue;
          Round round;
          round.questions.assign(r_, Token());
          round.questions[i] = point_token(w);
          round.questions[j] = residue_token("cv" + cb, sharp3);
          round.memo = 1;
          out.push_back({pw, round});
        }
      Point w2(p_.d2, 0);
      do {
        const std::string cc = "cc" + cb + curve_token_body(sharp_curve(w2)) + " " + std::to_string(k);
        const std::string cv = residue_token("cv" + cb, w2);
        for (int i = 0; i < r_; ++i)
          for (int j = 0; j < r_; ++j) {
            if (i == j) continue;
            Round round;
            round.questions.assign(r_, Token());
            round.questions[i] = cv;
            round.questions[j] = cc;
            round.memo = 2;
            out.push_back({pw * Rational(1, std::int64_t(nw2)), round});
          }
      } while (next(w2));
    } while (next(w));
  }
  return out;
}

FunctionStrategy honest_sat_strategy(const SatTest& test, const std::vector<bool>& assignment) {
  const SatTestParams p = test.params();
  const MultiPoly g = assignment_lde(p, assignment);
  const FunctionStrategy two = honest_twolevel_strategy(test.two_level().params(), g);
  const std::uint64_t q = p.field.modulus();
  const int m = p.m, m2 = p.d2;
  auto on_curve = [p, g, m](std::span<const Residue> v) {
    const auto c = parse_curve(v.first(4 * m), p.field, m);
    return substitute_vars_univariate(restrict_to_curve(g, *c), 4 * p.d);
  };
  return FunctionStrategy([=](int player, const Token& t, Rng& rng) -> Token {
    if (auto v = parse_tagged(t, "cv", q, 4 * m + m2))
      return std::to_string(on_curve(*v).evaluate(std::span<const Residue>(*v).subspan(4 * m)));
    if (auto v = parse_tagged(t, "cc", kAny, 4 * m + 4 * m2 + 1)) {
      for (int i = 0; i < 4 * m + 4 * m2; ++i)
        if ((*v)[i] >= q) return "0";
      const auto c2 = parse_curve(std::span<const Residue>(*v).subspan(4 * m, 4 * m2), p.field, m2);
      return unipoly_token(restrict_to_curve(on_curve(*v), *c2));
    }
    return two.answer(player, t, rng);
  });
}

}  // namespace nlg
