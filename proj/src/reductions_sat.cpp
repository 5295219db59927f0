#include <cmath>

#include "nlg/reductions.hpp"
#include "nlg/token.hpp"

namespace nlg {

void ReductionConfig::validate() const {
  require(eps1 > 0 && exponent >= 1, ErrorKind::InvalidInput, "field-size knobs must be positive");
  require(repeat_k >= 1 && repeat_k2 >= 0 && xor_k >= 1 && xor_k2 >= 0, ErrorKind::InvalidInput,
          "repetition counts must be K >= 1, K' >= 0");
  require(xor_eps >= 0 && xor_eps <= 1, ErrorKind::InvalidInput, "noise rate must lie in [0, 1]");
  require(max_subset >= 1 && max_subset <= 20, ErrorKind::InvalidInput, "subset cap must lie in [1, 20]");
  require(max_answer_bits >= 1 && max_answer_bits <= 8, ErrorKind::InvalidInput, "answer width cap must lie in [1, 8]");
}

FieldChoice choose_field(int n, const ReductionConfig& cfg) {
  cfg.validate();
  require(n >= 3, ErrorKind::InvalidInput, "need n >= 3");
  int h = 0;
  while ((std::int64_t(1) << h) < n) ++h;
  const std::uint64_t floor = std::max<std::uint64_t>(std::uint64_t(h) + 1, 4);
  FieldChoice c;
  if (cfg.q) {
    require(is_prime(cfg.q), ErrorKind::NotPrime, std::to_string(cfg.q) + " is not prime");
    require(cfg.q >= floor, ErrorKind::InvalidInput, "field size below max(h + 1, 4)");
    c.q = cfg.q;
    c.lo = c.hi = double(cfg.q);
    return c;
  }
  const double x = std::pow(std::log2(double(n)) / cfg.eps1, cfg.exponent);
  require(x < 1e15, ErrorKind::TooLarge, "field size (log2 n / eps1)^exponent is too large");
  c.lo = std::max(std::ceil(x), double(floor));
  c.hi = 2 * x;
  for (;;) {
    const std::uint64_t p = next_prime(std::uint64_t(c.lo));
    if (double(p) <= c.hi) {
      c.q = p;
      return c;
    }
    c.hi *= 2;
    ++c.widenings;
  }
}

GphiGame build_game_Gphi(const Cnf& cnf, const ReductionConfig& cfg) {
  GphiGame out;
  out.field = choose_field(cnf.n, cfg);
  out.game = std::make_shared<SatTest>(cnf, make_field(out.field.q), 3);
  const auto& p = out.game->params();
  const int m2 = out.game->two_level().params().d2();
  auto& L = out.lengths;
  L.field_bits = int(std::ceil(std::log2(double(out.field.q))));
  L.bound_bits = 6 * p.m * L.field_bits;
  L.longest_two_level = (3 * p.m + 3 * m2) * L.field_bits;
  int clause_bits = 0;
  while ((std::size_t(1) << clause_bits) < cnf.clauses.size()) ++clause_bits;
  const int sat_longest = (4 * p.m + 4 * p.d2) * L.field_bits + clause_bits;
  L.longest = std::max(L.longest_two_level, sat_longest);
  L.longest_answer = int(std::max<std::size_t>(BiPoly::size_for(m2), std::size_t(4 * p.d2 + 1))) * L.field_bits;
  return out;
}

// ---------------------------------------------------------------- clause/variable game

namespace {

std::optional<std::size_t> parse_index(const Token& t, char tag, std::size_t limit) {
  const auto v = parse_tagged(t, std::string(1, tag), limit, 1);
  if (!v) return std::nullopt;
  return (*v)[0];
}

}  // namespace

ClauseVariableGame::ClauseVariableGame(Cnf cnf) : cnf_(std::move(cnf)) {
  cnf_.validate();
  require(!cnf_.clauses.empty(), ErrorKind::InvalidInput, "formula has no clauses");
}

Round ClauseVariableGame::sample(Rng& rng) const {
  const int i = int(rng.below(3));
  const int j = (i + 1 + int(rng.below(2))) % 3;
  const std::size_t k = rng.below(cnf_.clauses.size());
  const int t = int(rng.below(3));
  Round round;
  round.questions.assign(3, Token());
  round.questions[i] = "c " + std::to_string(k);
  round.questions[j] = "v " + std::to_string(std::abs(cnf_.clauses[k][t]));
  return round;
}

bool ClauseVariableGame::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  if (round.questions.size() != 3 || answers.size() != 3) return false;
  int ic = -1, iv = -1;
  for (int i = 0; i < 3; ++i) {
    if (round.questions[i].empty()) continue;
    if (round.questions[i][0] == 'c' && ic < 0) ic = i;
    else if (round.questions[i][0] == 'v' && iv < 0) iv = i;
    else return false;
  }
  if (ic < 0 || iv < 0) return false;
  const auto k = parse_index(round.questions[ic], 'c', cnf_.clauses.size());
  const auto var = parse_index(round.questions[iv], 'v', std::size_t(cnf_.n) + 1);
  if (!k || !var) return false;
  const auto bits = string_to_bits(answers[ic]);
  const auto b = string_to_bits(answers[iv]);
  if (!bits || bits->size() != 3 || !b || b->size() != 1) return false;
  const auto& c = cnf_.clauses[*k];
  bool sat = false, seen = false;
  for (int p = 0; p < 3; ++p) {
    for (int p2 = 0; p2 < p; ++p2)
      if (std::abs(c[p]) == std::abs(c[p2]) && (*bits)[p] != (*bits)[p2]) return false;
    if (std::size_t(std::abs(c[p])) == *var) {
      seen = true;
      if ((*bits)[p] != (*b)[0]) return false;
    }
    sat = sat || (*bits)[p] == (c[p] > 0);
  }
  return seen && sat;
}

std::optional<std::vector<WeightedRound>> ClauseVariableGame::enumerate(std::uint64_t cap) const {
  const std::uint64_t total = 18 * cnf_.clauses.size();
  require(total <= cap, ErrorKind::TooLarge, "enumeration exceeds cap " + std::to_string(cap));
  const Rational w(1, std::int64_t(total));
  std::vector<WeightedRound> out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      for (std::size_t k = 0; k < cnf_.clauses.size(); ++k)
        for (int t = 0; t < 3; ++t) {
          Round round;
          round.questions.assign(3, Token());
          round.questions[i] = "c " + std::to_string(k);
          round.questions[j] = "v " + std::to_string(std::abs(cnf_.clauses[k][t]));
          out.push_back({w, std::move(round)});
        }
    }
  return out;
}

std::optional<std::vector<Token>> ClauseVariableGame::answer_alphabet(std::uint64_t) const {
  std::vector<Token> out{"0", "1"};
  for (int v = 0; v < 8; ++v) out.push_back(bits_to_string({std::uint8_t(v & 1), std::uint8_t(v >> 1 & 1), std::uint8_t(v >> 2)}));
  return out;
}

FunctionStrategy honest_clause_strategy(const Cnf& cnf, const std::vector<bool>& assignment) {
  require(int(assignment.size()) == cnf.n, ErrorKind::DimensionMismatch, "assignment length differs from n");
  return FunctionStrategy([cnf, assignment](int, const Token& t, Rng&) -> Token {
    if (const auto k = parse_index(t, 'c', cnf.clauses.size())) {
      std::string out;
      for (int lit : cnf.clauses[*k]) out += assignment[std::size_t(std::abs(lit) - 1)] ? '1' : '0';
      return out;
    }
    if (const auto v = parse_index(t, 'v', std::size_t(cnf.n) + 1); v && *v >= 1)
      return assignment[*v - 1] ? "1" : "0";
    return "0";
  });
}

std::vector<bool> decode_assignment(const MultiPoly& g, const SatTestParams& p) {
  std::vector<bool> out(std::size_t(p.n));
  for (int i = 1; i <= p.n; ++i) out[std::size_t(i - 1)] = g.evaluate(variable_point(p, i)) != 0;
  return out;
}

}  // namespace nlg
