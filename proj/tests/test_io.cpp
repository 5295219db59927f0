#include <sstream>

#include "doctest.h"
#include "gen_quantum.hpp"
#include "nlg/io.hpp"

using namespace nlg;

namespace {

template <class T>
std::string dump(const T& write) {
  std::ostringstream s;
  write(s);
  return s.str();
}

ExplicitGame random_game(Rng& rng, int players, int nq, int na) {
  std::vector<std::string> qs, as;
  for (int i = 0; i < nq; ++i) qs.push_back(i == 0 ? "q 0" : "q" + std::to_string(i));
  for (int i = 0; i < na; ++i) as.push_back(i == 1 ? "%a" : "a" + std::to_string(i));
  ExplicitGame g("random game", players, qs, as);
  const int tuples = 1 + int(rng.below(5));
  for (int t = 0; t < tuples; ++t) {
    std::vector<int> q(players);
    for (auto& x : q) x = int(rng.below(nq));
    g.add_question(q, Rational(1, tuples));
  }
  std::vector<std::pair<std::vector<int>, std::vector<int>>> acc;
  for (const auto& [q, w] : g.distribution())
    for (int k = 0; k < 3; ++k) {
      std::vector<int> a(players);
      for (auto& x : a) x = int(rng.below(na));
      acc.emplace_back(q, a);
    }
  g.set_accept_table(acc);
  return g;
}

}  // namespace

TEST_CASE("labels survive escaping") {
  for (const std::string& s : std::vector<std::string>{"a", "0", "c 3", "", "%x", std::string("\x01\xff", 2), "T\x03x"}) {
    const auto e = encode_label(s);
    CHECK(e.find(' ') == std::string::npos);
    CHECK(decode_label(e) == s);
  }
  CHECK(encode_label("plain") == "plain");
  CHECK_THROWS_AS(decode_label("%zz"), Error);
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("game tables round-trip") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_game(rng, 2 + int(rng.below(2)), 3, 3);
    const std::string text = dump([&](std::ostream& o) { write_game(o, g); });
    std::istringstream in(text);
    const auto back = read_game(in);
    CHECK(back.name() == g.name());
    CHECK(back.question_labels() == g.question_labels());
    CHECK(back.answer_labels() == g.answer_labels());
    // Identical acceptance on every question/answer tuple in the support.
    for (const auto& [q, w] : g.distribution())
      for (int a0 = 0; a0 < 3; ++a0)
        for (int a1 = 0; a1 < 3; ++a1)
          for (int a2 = 0; a2 < 3; ++a2) {
            std::vector<int> a{a0, a1, a2};
            a.resize(g.players());
            CHECK(back.predicate(q, a) == g.predicate(q, a));
          }
    CHECK(dump([&](std::ostream& o) { write_game(o, back); }) == text);
  }
  // Named checkers are written by reference.
  const std::string chsh = dump([](std::ostream& o) { write_game(o, chsh_game()); });
  CHECK(chsh.find("accept checker chsh") != std::string::npos);
  std::istringstream in(chsh);
  const auto back = read_game(in);
  CHECK(back.is_xor());
  CHECK(classical_value_bruteforce(back).value == Rational(3, 4));
}

TEST_CASE("malformed game files are rejected") {
  const std::string good = dump([](std::ostream& o) { write_game(o, chsh_game()); });
  auto reject = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_game(in), Error);
  };
  reject("");
  reject("nlg-game 2\n");
  std::string s = good;
  s.replace(s.find("1/4"), 3, "1/3");
  reject(s);  // weights no longer sum to 1
  s = good;
  s.replace(s.find("checker chsh"), 12, "checker nope");
  reject(s);
  s = good;
  s.replace(s.find("header 2"), 8, "header 0");
  reject(s);
}

TEST_CASE("deterministic strategies round-trip") {
  const auto g = chsh_game();
  const auto best = classical_value_bruteforce(g);
  const std::string text = dump([&](std::ostream& o) { write_deterministic(o, g, best.strategy); });
  std::istringstream in(text);
  const auto back = read_deterministic(in, g);
  CHECK(back.table == best.strategy.table);
  CHECK(evaluate_deterministic(g, back) == Rational(3, 4));
  std::istringstream bad("nlg-strategy deterministic\n0 7 1\n");
  CHECK_THROWS_AS(read_deterministic(bad, g), Error);
  std::istringstream clash("nlg-strategy deterministic\n0 0 1\n0 0 0\n");
  CHECK_THROWS_AS(read_deterministic(clash, g), Error);
}

TEST_CASE("quantum strategies round-trip bit for bit") {
  const auto c = chsh_canned();
  const std::string text = dump([&](std::ostream& o) { write_quantum(o, c.game, c.strategy); });
  std::istringstream in(text);
  const auto back = read_quantum(in, c.game);
  CHECK(back.state == c.strategy.state);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      for (int a = 0; a < 2; ++a) CHECK(back.povms[p][q][a] == c.strategy.povms[p][q][a]);
  CHECK(evaluate_quantum(c.game, back) == evaluate_quantum(c.game, c.strategy));
  CHECK(dump([&](std::ostream& o) { write_quantum(o, c.game, back); }) == text);
}

TEST_CASE("random matrices round-trip exactly") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + int(rng.below(4));
    const Mat m = gen::gaussian(d, d + 1, rng);
    std::ostringstream s;
    write_matrix(s, m);
    std::istringstream in(s.str());
    CHECK(read_matrix(in) == m);
  }
}

TEST_CASE("metric inputs round-trip") {
  MetricsInput x;
  x.state = ghz_state(2, 2);
  x.points = 2;
  x.outcomes = 2;
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1;
  p1(1, 1) = 1;
  x.a = {{p0, p1}, {p0, p1}};
  x.values = {{0, 0}, {1, 1}};
  x.m = {p0, p1};
  x.edges = {{0, 1}};
  x.weights = {0.25, 0.75};
  const std::string text = dump([&](std::ostream& o) { write_metrics(o, x); });
  std::istringstream in(text);
  const auto back = read_metrics(in);
  CHECK(back.state.amp == x.state.amp);
  CHECK(back.values == x.values);
  CHECK(back.edges == x.edges);
  CHECK(back.weights == x.weights);
  CHECK(back.m.size() == 2);
  CHECK(dump([&](std::ostream& o) { write_metrics(o, back); }) == text);
  const auto c = consistency_metrics(back.m, back.values, back.a, back.state, back.weights);
  CHECK(c.delta == 0);
  CHECK(c.gamma == 0);
  CHECK(c.eta == 0);

  std::istringstream missing("nlg-metrics 1\npoints 1 2\nend\n");
  CHECK_THROWS_AS(read_metrics(missing), Error);
}
