#include "doctest.h"
#include "gen.hpp"
#include "nlg/protocols.hpp"
#include "nlg/token.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace nlg;

namespace {

Rational total_weight(const std::vector<WeightedRound>& rounds) {
  Rational s;
  for (const auto& wr : rounds) s += wr.weight;
  return s;
}

// Strategy that answers like `base` except on one question token.
FunctionStrategy override_one(const Strategy& base, Token question, Token answer) {
  return FunctionStrategy([&base, question, answer](int p, const Token& t, Rng& rng) {
    return t == question ? answer : base.answer(p, t, rng);
  });
}

Cnf random_cnf(int n, int clauses, Rng& rng) {
  Cnf cnf;
  cnf.n = n;
  for (int k = 0; k < clauses; ++k) {
    std::array<int, 3> c{};
    for (auto& lit : c) lit = int(rng.below(std::uint64_t(n)) + 1) * (rng.bit() ? 1 : -1);
    cnf.clauses.push_back(c);
  }
  return cnf;
}

// Instance satisfied by x, with equations drawn at random.
QuadeqInstance planted_quadeq(int chunk, int naux, int k, const std::vector<std::uint8_t>& x, Rng& rng) {
  QuadeqInstance inst;
  inst.n = 2 * chunk + naux;
  inst.naux = naux;
  for (int e = 0; e < k; ++e) {
    QuadEquation eq;
    const int terms = int(rng.below(4)) + 1;
    std::uint8_t s = 0;
    for (int t = 0; t < terms; ++t) {
      const int i = int(rng.below(std::uint64_t(inst.n))), j = int(rng.below(std::uint64_t(inst.n)));
      eq.terms.push_back({i, j});
      s ^= x[i] & x[j];
    }
    eq.constant = s;
    inst.equations.push_back(eq);
  }
  return inst;
}

}  // namespace

TEST_CASE("tokens: pack, bits and hex round-trip") {
  const std::vector<std::string> fields{"", "a:b", "12:xy", ""};
  CHECK(unpack(pack(fields)) == fields);
  CHECK_FALSE(unpack("3:ab").has_value());
  CHECK_FALSE(unpack("x:ab").has_value());
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::uint8_t> b(rng.below(20));
    for (auto& v : b) v = rng.bit();
    CHECK(string_to_bits(bits_to_string(b)) == b);
    CHECK(from_hex(to_hex(b), b.size()) == b);
  }
  CHECK_FALSE(from_hex("f", 3).has_value());
  CHECK(parse_tagged("pt 1 2", "pt", 5, 2) == std::vector<std::uint64_t>{1, 2});
  CHECK_FALSE(parse_tagged("pt 1 7", "pt", 5, 2).has_value());
  CHECK_FALSE(parse_tagged("ptx 1 2", "pt", 5, 2).has_value());
}

TEST_CASE("3-SAT parameters") {
  const auto p = sat_params(256, make_field(97));
  CHECK(p.h == 8);
  CHECK(p.m == 3);
  CHECK(p.d == 24);
  CHECK(p.d2 == 7);
  const auto s = sat_params(16, make_field(97));
  CHECK(s.h == 4);
  CHECK(s.m == 2);
  CHECK(s.d == 8);
  CHECK(s.d2 == 6);
  CHECK_THROWS_AS(sat_params(256, make_field(5)), Error);
  // Grid always covers every variable.
  for (int n = 3; n <= 300; ++n) {
    const auto q = sat_params(n, make_field(1009));
    CHECK(std::pow(q.h + 1, q.m) >= n);
    CHECK((1 << q.h) >= n);
  }
}

TEST_CASE("low-degree test: exact distribution and honest value") {
  const LowDegreeParams p{make_field(3), 1, 2, 2};
  const LowDegreeTest test(p);
  const auto rounds = test.enumerate(1'000'000);
  REQUIRE(rounds);
  CHECK(total_weight(*rounds) == Rational(1));

  Rng rng(11);
  const auto g = gen::poly(p.field, p.m, p.d, 3, rng);
  const auto honest = honest_ld_strategy(p, g);
  CHECK(evaluate_exact(test, honest) == Rational(1));

  // Corrupting one point costs exactly the mass of rounds that ask it.
  const Point x{1, 2};
  const Token tx = point_token(x);
  const std::string wrong = std::to_string((g.evaluate(x) + 1) % 3);
  Rational asked;
  for (const auto& wr : *rounds)
    for (const auto& t : wr.round.questions)
      if (t == tx) asked += wr.weight;
  CHECK(asked > Rational(0));
  CHECK(evaluate_exact(test, override_one(honest, tx, wrong)) == Rational(1) - asked);

  // Sampled rounds agree with the enumeration.
  const auto mc = monte_carlo_value(test, honest, 500, 5);
  CHECK(mc.accepted == mc.rounds);
}

TEST_CASE("low-degree test: malformed and over-degree answers reject") {
  const LowDegreeParams p{make_field(5), 1, 2, 2};
  const LowDegreeTest test(p);
  Rng rng(2);
  const auto g = gen::poly(p.field, p.m, 2, 4, rng);  // degree 2 > d
  Round round;
  do round = test.sample(rng);
  while (round.auto_accept);
  const auto honest = honest_ld_strategy(p, gen::poly(p.field, p.m, 1, 3, rng));
  std::vector<Token> answers(2);
  for (int i = 0; i < 2; ++i) answers[i] = honest.answer(i, round.questions[i], rng);
  CHECK(test.accept(round, answers));
  for (int i = 0; i < 2; ++i) {
    auto bad = answers;
    bad[i] = "junk";
    CHECK_FALSE(test.accept(round, bad));
    bad[i] = answers[i] + " 0";
    CHECK_FALSE(test.accept(round, bad));
  }
  (void)g;
}

TEST_CASE("two-level test at d = 1") {
  const LowDegreeParams p{make_field(3), 1, 2, 2};
  const auto [m1, m2] = twolevel_second_player_marginals(p);
  CHECK(m1 == m2);

  const TwoLevelTest test(p);
  const auto rounds = test.enumerate(10'000'000);
  REQUIRE(rounds);
  CHECK(total_weight(*rounds) == Rational(1));
  Rng rng(4);
  const auto g = gen::poly(p.field, p.m, p.d, 3, rng);
  CHECK(evaluate_exact(test, honest_twolevel_strategy(p, g)) == Rational(1));
}

TEST_CASE("two-level test: honest strategy passes sampled rounds at higher degree") {
  const LowDegreeParams p{make_field(7), 3, 2, 3};
  const TwoLevelTest test(p);
  Rng rng(8);
  const auto g = gen::poly(p.field, p.m, p.d, 5, rng);
  const auto mc = monte_carlo_value(test, honest_twolevel_strategy(p, g), 300, 9);
  CHECK(mc.accepted == mc.rounds);
}

TEST_CASE("DIMACS parsing") {
  const Cnf cnf = parse_dimacs("c comment\np cnf 4 3\n1 -2 3 0\n-4 0\n2 3\n4 0\n");
  CHECK(cnf.n == 4);
  REQUIRE(cnf.clauses.size() == 3);
  CHECK(cnf.clauses[1] == std::array<int, 3>{-4, -4, -4});
  CHECK(cnf.clauses[2] == std::array<int, 3>{2, 3, 4});
  std::ostringstream out;
  write_dimacs(out, cnf);
  CHECK(parse_dimacs(out.str()).clauses == cnf.clauses);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 1\n1 3 0\n"), Error);
  CHECK_THROWS_AS(parse_dimacs("p cnf 4 1\n1 2 3 4 0\n"), Error);
  CHECK_THROWS_AS(parse_dimacs("p cnf 2 2\n1 2 0\n"), Error);
  CHECK_THROWS_AS(parse_dimacs("1 2 0\n"), Error);
}

TEST_CASE("3-SAT test: honest strategy on a satisfying assignment") {
  Rng rng(21);
  const std::vector<bool> x{true, false, true, true, false};
  Cnf cnf = random_cnf(5, 12, rng);
  for (auto& c : cnf.clauses)  // make the first literal true under x
    c[0] = x[std::size_t(std::abs(c[0]) - 1)] ? std::abs(c[0]) : -std::abs(c[0]);
  const SatTest test(cnf, make_field(7));
  const auto honest = honest_sat_strategy(test, x);
  const auto mc = monte_carlo_value(test, honest, 1000, 3);
  CHECK(mc.accepted == mc.rounds);
}

TEST_CASE("3-SAT test: violated clauses cost a quarter of their fraction") {
  Rng rng(22);
  const Cnf cnf = random_cnf(5, 16, rng);
  std::vector<bool> x(5);
  double gamma = 0;
  do {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.bit();
    gamma = cnf.violated_fraction(x);
  } while (gamma < 0.2);
  const SatTest test(cnf, make_field(7));
  const std::uint64_t n = 4000;
  const auto mc = monte_carlo_value(test, honest_sat_strategy(test, x), n, 17);
  const double rej = 1.0 - mc.estimate;
  const double sigma = std::sqrt(gamma / 4 * (1 - gamma / 4) / double(n));
  CHECK(std::abs(rej - gamma / 4) <= 4 * sigma);
}

TEST_CASE("3-SAT test: the clause check reads literals from field values") {
  Rng rng(5);
  Cnf cnf;
  cnf.n = 3;
  cnf.clauses = {{1, -2, 3}};
  const SatTest test(cnf, make_field(5));
  // All assignments: only (F, T, F) violates the clause.
  for (int mask = 0; mask < 8; ++mask) {
    const std::vector<bool> x{bool(mask & 1), bool(mask & 2), bool(mask & 4)};
    const auto mc = monte_carlo_value(test, honest_sat_strategy(test, x), 400, 7 + mask);
    if (mask == 2) {
      CHECK(mc.accepted < mc.rounds);
    } else {
      CHECK(mc.accepted == mc.rounds);
    }
  }
}

TEST_CASE("linearity test") {
  const LinearityTest test(2);
  const auto rounds = test.enumerate(1000);
  REQUIRE(rounds);
  CHECK(total_weight(*rounds) == Rational(1));
  std::set<std::vector<Token>> triples;
  for (const auto& wr : *rounds) {
    auto q = wr.round.questions;
    std::sort(q.begin(), q.end());
    triples.insert(q);
  }
  // Unordered question triples {x, y, x + y} as multisets.
  std::set<std::vector<Token>> expected;
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) {
      auto tok = [](int v) { return bits_to_string({std::uint8_t(v & 1), std::uint8_t(v >> 1)}); };
      std::vector<Token> q{tok(x), tok(y), tok(x ^ y)};
      std::sort(q.begin(), q.end());
      expected.insert(q);
    }
  CHECK(triples == expected);
  CHECK(rounds->size() == 16 * 6);

  for (int u = 0; u < 4; ++u)
    CHECK(evaluate_exact(test, linear_strategy({std::uint8_t(u & 1), std::uint8_t(u >> 1)})) == Rational(1));
  const FunctionStrategy ones([](int, const Token&, Rng&) { return Token("1"); });
  CHECK(evaluate_exact(test, ones) == Rational(0));
}

TEST_CASE("compiled tables agree with the sampler") {
  const auto test = std::make_shared<LinearityTest>(2);
  const ExplicitGame table = compile_to_table(test);
  CHECK(table.num_questions() == 5);  // four bit strings plus the unqueried label
  Rng rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    std::map<Token, Token> f;
    for (const char* q : {"00", "01", "10", "11"}) f[q] = rng.bit() ? "1" : "0";
    const FunctionStrategy s([f](int, const Token& t, Rng&) {
      auto it = f.find(t);
      return it == f.end() ? Token("0") : it->second;
    });
    CHECK(evaluate_exact(table, s) == evaluate_exact(*test, s));
    const double a = monte_carlo_value(table, s, 2000, 1).estimate;
    const double b = monte_carlo_value(*test, s, 2000, 2).estimate;
    CHECK(std::abs(a - b) <= 2 * hoeffding_half_width(2000));
  }

  const auto ld = std::make_shared<LowDegreeTest>(LowDegreeParams{make_field(3), 1, 2, 2});
  const ExplicitGame ldt = compile_to_table(ld);
  Rng r2(31);
  const auto g = gen::poly(make_field(3), 2, 1, 3, r2);
  CHECK(evaluate_exact(ldt, honest_ld_strategy(ld->params(), g)) == Rational(1));

  QuadeqInstance inst;
  inst.n = 2;
  CHECK_THROWS_AS(compile_to_table(std::make_shared<QuadeqTest>(inst)), Error);
}

TEST_CASE("QUADEQ: file format") {
  std::istringstream in("# comment\n2 5 1\n0 1 2 2 = 1\n= 0\n");
  const auto inst = read_quadeq(in);
  CHECK(inst.n == 5);
  CHECK(inst.naux == 1);
  CHECK(inst.chunk() == 2);
  REQUIRE(inst.equations.size() == 2);
  CHECK(inst.equations[0].terms.size() == 2);
  CHECK(inst.equations[1].terms.empty());
  std::ostringstream out;
  write_quadeq(out, inst);
  std::istringstream back(out.str());
  CHECK(read_quadeq(back).equations.size() == 2);
  std::istringstream odd("1 4\n0 1 2 = 1\n");
  CHECK_THROWS_AS(read_quadeq(odd), Error);
  std::istringstream uneven("0 5\n");
  CHECK_THROWS_AS(read_quadeq(uneven), Error);
}

TEST_CASE("QUADEQ test: completeness on planted instances") {
  Rng rng(40);
  for (int trial = 0; trial < 5; ++trial) {
    const int chunk = 2 + int(rng.below(3)), naux = int(rng.below(3));
    std::vector<std::uint8_t> x(std::size_t(2 * chunk + naux));
    for (auto& b : x) b = rng.bit();
    const auto inst = planted_quadeq(chunk, naux, 6, x, rng);
    REQUIRE(inst.satisfied(x));
    const QuadeqTest test(inst);
    const auto mc = monte_carlo_value(test, honest_quadeq_strategy(inst, x), 2000, 41 + trial);
    CHECK(mc.accepted == mc.rounds);
  }
  // Zero equations are allowed.
  QuadeqInstance empty;
  empty.n = 4;
  const auto mc = monte_carlo_value(QuadeqTest(empty), honest_quadeq_strategy(empty, {1, 0, 1, 1}), 500, 3);
  CHECK(mc.accepted == mc.rounds);
}

TEST_CASE("QUADEQ test: an unsatisfied equation is caught in the equation step") {
  QuadeqInstance inst;
  inst.n = 4;
  inst.equations.push_back({{}, 1});  // 0 = 1
  const std::uint64_t n = 8000;
  const auto mc = monte_carlo_value(QuadeqTest(inst), honest_quadeq_strategy(inst, {0, 1, 1, 0}), n, 12);
  // Step 1.4 runs with probability 1/4 and picks v_1 = 1 with probability 1/2.
  const double rej = 1.0 - mc.estimate, sigma = std::sqrt(0.125 * 0.875 / double(n));
  CHECK(std::abs(rej - 0.125) <= 4 * sigma);
}

TEST_CASE("QUADEQ questions round-trip") {
  const QuadeqQuestion q{2, "l1", "l2", {1, 0, 1}};
  const auto back = parse_quadeq_question(quadeq_question_token(q));
  REQUIRE(back);
  CHECK(back->kind == 2);
  CHECK(back->label2 == "l2");
  CHECK(back->bits == q.bits);
  CHECK_FALSE(parse_quadeq_question("2:ab").has_value());
}
