#include "nlg/game.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <thread>

#include "nlg/error.hpp"

namespace nlg {

namespace {

std::string tuple_key(std::span<const int> q, std::span<const int> a) {
  std::string k;
  k.reserve(4 * (q.size() + a.size()));
  for (int x : q) k.append(reinterpret_cast<const char*>(&x), sizeof x);
  k.push_back('|');
  for (int x : a) k.append(reinterpret_cast<const char*>(&x), sizeof x);
  return k;
}

// Numerators of the weights over their least common denominator.
std::pair<std::vector<std::int64_t>, std::int64_t> common_denominator(const std::vector<Rational>& w) {
  std::int64_t lcd = 1;
  for (const auto& x : w) {
    const std::int64_t g = std::gcd(lcd, x.den());
    const __int128 next = __int128(lcd / g) * x.den();
    require(next <= INT64_MAX, ErrorKind::TooLarge, "weight denominators overflow");
    lcd = std::int64_t(next);
  }
  std::vector<std::int64_t> nums;
  nums.reserve(w.size());
  for (const auto& x : w) nums.push_back(x.num() * (lcd / x.den()));
  return {nums, lcd};
}

}  // namespace

ExplicitGame::ExplicitGame(std::string name, int players, std::vector<std::string> questions,
                           std::vector<std::string> answers)
    : name_(std::move(name)), r_(players), q_(std::move(questions)), a_(std::move(answers)) {
  require(players >= 1, ErrorKind::InvalidInput, "a game needs at least one player");
  require(!q_.empty() && !a_.empty(), ErrorKind::InvalidInput, "empty question or answer set");
  for (int i = 0; i < int(q_.size()); ++i) {
    require(!q_[i].empty(), ErrorKind::InvalidInput, "empty question label");
    require(qidx_.emplace(q_[i], i).second, ErrorKind::InvalidInput, "duplicate question label '" + q_[i] + "'");
  }
  for (int i = 0; i < int(a_.size()); ++i) {
    require(!a_[i].empty(), ErrorKind::InvalidInput, "empty answer label");
    require(aidx_.emplace(a_[i], i).second, ErrorKind::InvalidInput, "duplicate answer label '" + a_[i] + "'");
  }
}

void ExplicitGame::add_question(std::vector<int> q, Rational weight) {
  require(int(q.size()) == r_, ErrorKind::InvalidInput, "question tuple length differs from player count");
  for (int x : q) require(x >= 0 && x < num_questions(), ErrorKind::InvalidInput, "question index out of range");
  require(weight > Rational(0), ErrorKind::InvalidInput, "question weights must be positive");
  cdf_.push_back((cdf_.empty() ? 0.0 : cdf_.back()) + weight.to_double());
  pi_.emplace_back(std::move(q), weight);
}

void ExplicitGame::set_accept_table(std::vector<std::pair<std::vector<int>, std::vector<int>>> accepted) {
  table_lookup_.clear();
  for (const auto& [q, a] : accepted) {
    require(int(q.size()) == r_ && int(a.size()) == r_, ErrorKind::InvalidInput, "accept tuple of wrong length");
    for (int x : a) require(x >= 0 && x < num_answers(), ErrorKind::InvalidInput, "answer index out of range");
    table_lookup_.insert(tuple_key(q, a));
  }
  table_ = std::move(accepted);
  checker_.clear();
  pred_ = nullptr;
}

void ExplicitGame::set_checker(std::string checker_name, Predicate p) {
  checker_ = std::move(checker_name);
  pred_ = std::move(p);
  table_.reset();
  table_lookup_.clear();
}

bool ExplicitGame::predicate(std::span<const int> q, std::span<const int> a) const {
  if (table_) return table_lookup_.count(tuple_key(q, a)) > 0;
  require(bool(pred_), ErrorKind::InvalidInput, "game '" + name_ + "' has no predicate");
  return pred_(q, a);
}

void ExplicitGame::validate() const {
  require(!pi_.empty(), ErrorKind::InvalidInput, "empty question distribution");
  Rational total;
  for (const auto& [q, w] : pi_) total += w;
  require(total == Rational(1), ErrorKind::InvalidInput, "question weights sum to " + total.str() + ", not 1");
  require(table_.has_value() || bool(pred_), ErrorKind::InvalidInput, "game has no predicate");
  if (symmetric_) require(check_symmetry(), ErrorKind::InvalidInput, "game claims symmetry but is not symmetric");
}

bool ExplicitGame::check_symmetry() const {
  std::map<std::vector<int>, Rational> mass;
  for (const auto& [q, w] : pi_) mass[q] += w;
  std::vector<int> perm(r_);
  std::iota(perm.begin(), perm.end(), 0);
  const int na = num_answers();
  std::uint64_t tuples = 1;
  for (int i = 0; i < r_; ++i) tuples *= std::uint64_t(na);
  require(tuples * mass.size() <= 10'000'000, ErrorKind::TooLarge, "symmetry check too large");
  std::vector<int> pq(r_), a(r_), pa(r_);
  while (std::next_permutation(perm.begin(), perm.end())) {
    for (const auto& [q, w] : mass) {
      for (int j = 0; j < r_; ++j) pq[j] = q[perm[j]];
      auto it = mass.find(pq);
      if (it == mass.end() || it->second != w) return false;
      for (std::uint64_t t = 0; t < tuples; ++t) {
        std::uint64_t rest = t;
        for (int j = 0; j < r_; ++j, rest /= na) a[j] = int(rest % na);
        for (int j = 0; j < r_; ++j) pa[j] = a[perm[j]];
        if (predicate(q, a) != predicate(pq, pa)) return false;
      }
    }
  }
  return true;
}

std::vector<int> ExplicitGame::support(int player) const {
  std::vector<int> out;
  for (const auto& [q, w] : pi_) out.push_back(q[player]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int ExplicitGame::question_index(const Token& t) const {
  auto it = qidx_.find(t);
  return it == qidx_.end() ? -1 : it->second;
}

int ExplicitGame::answer_index(const Token& t) const {
  auto it = aidx_.find(t);
  return it == aidx_.end() ? -1 : it->second;
}

Round ExplicitGame::sample(Rng& rng) const {
  require(!pi_.empty(), ErrorKind::InvalidInput, "empty question distribution");
  const double u = rng.uniform() * cdf_.back();
  std::size_t k = std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin();
  k = std::min(k, pi_.size() - 1);
  Round round;
  for (int x : pi_[k].first) round.questions.push_back(q_[x]);
  round.memo = k;
  return round;
}

bool ExplicitGame::accept(const Round& round, std::span<const Token> answers) const {
  if (round.auto_accept) return true;
  if (int(answers.size()) != r_ || int(round.questions.size()) != r_) return false;
  std::vector<int> q(r_), a(r_);
  for (int i = 0; i < r_; ++i) {
    q[i] = question_index(round.questions[i]);
    a[i] = answer_index(answers[i]);
    if (q[i] < 0 || a[i] < 0) return false;
  }
  return predicate(q, a);
}

std::optional<std::vector<WeightedRound>> ExplicitGame::enumerate(std::uint64_t cap) const {
  require(pi_.size() <= cap, ErrorKind::TooLarge, "question distribution exceeds enumeration cap");
  std::vector<WeightedRound> out;
  out.reserve(pi_.size());
  for (const auto& [q, w] : pi_) {
    Round round;
    for (int x : q) round.questions.push_back(q_[x]);
    out.push_back({w, std::move(round)});
  }
  return out;
}

Token DeterministicAdapter::answer(int player, const Token& question, Rng&) const {
  const int q = g_.question_index(question);
  require(q >= 0, ErrorKind::InvalidInput, "unknown question token");
  require(player < int(s_.table.size()) && q < int(s_.table[player].size()) && s_.table[player][q] >= 0,
          ErrorKind::InvalidInput, "strategy undefined on question '" + question + "'");
  return g_.answer_labels()[s_.table[player][q]];
}

Rational evaluate_deterministic(const ExplicitGame& g, const DeterministicStrategy& s) {
  const int r = g.players();
  require(int(s.table.size()) == r, ErrorKind::InvalidInput, "strategy has wrong number of players");
  Rational value;
  std::vector<int> a(r);
  for (const auto& [q, w] : g.distribution()) {
    for (int i = 0; i < r; ++i) {
      require(q[i] < int(s.table[i].size()) && s.table[i][q[i]] >= 0, ErrorKind::InvalidInput,
              "strategy of player " + std::to_string(i) + " undefined on question '" + g.question_labels()[q[i]] + "'");
      a[i] = s.table[i][q[i]];
      require(a[i] < g.num_answers(), ErrorKind::InvalidInput, "answer index out of range");
    }
    if (g.predicate(q, a)) value += w;
  }
  return value;
}

ClassicalOptimum classical_value_bruteforce(const ExplicitGame& g, std::uint64_t cap) {
  g.validate();
  const int r = g.players(), na = g.num_answers();
  std::vector<std::vector<int>> supp(r);
  std::uint64_t count = 1;
  for (int i = 0; i < r; ++i) {
    supp[i] = g.support(i);
    for (std::size_t k = 0; k < supp[i].size(); ++k) {
      require(count <= cap / std::uint64_t(na), ErrorKind::TooLarge,
              "classical brute force exceeds cap " + std::to_string(cap));
      count *= std::uint64_t(na);
    }
  }
  // Position of each question inside a player's support list.
  std::vector<std::vector<int>> pos(r, std::vector<int>(g.num_questions(), -1));
  for (int i = 0; i < r; ++i)
    for (std::size_t k = 0; k < supp[i].size(); ++k) pos[i][supp[i][k]] = int(k);

  std::vector<Rational> weights;
  for (const auto& [q, w] : g.distribution()) weights.push_back(w);
  const auto [nums, lcd] = common_denominator(weights);

  // accepted[t][a] for every distribution entry t and answer tuple a.
  std::uint64_t tuples = 1;
  for (int i = 0; i < r; ++i) tuples *= std::uint64_t(na);
  const auto& dist = g.distribution();
  std::vector<std::vector<char>> accepted(dist.size(), std::vector<char>(tuples));
  std::vector<int> a(r);
  for (std::size_t t = 0; t < dist.size(); ++t)
    for (std::uint64_t code = 0; code < tuples; ++code) {
      std::uint64_t rest = code;
      for (int i = 0; i < r; ++i, rest /= na) a[i] = int(rest % na);
      accepted[t][code] = g.predicate(dist[t].first, a);
    }

  const int last = r - 1;
  std::vector<std::vector<int>> assign(r);
  for (int i = 0; i < last; ++i) assign[i].assign(supp[i].size(), 0);
  std::int64_t best = -1;
  DeterministicStrategy best_s;
  std::vector<std::int64_t> score(supp[last].size() * na);
  for (;;) {
    std::fill(score.begin(), score.end(), 0);
    for (std::size_t t = 0; t < dist.size(); ++t) {
      const auto& q = dist[t].first;
      std::uint64_t code = 0, mul = 1;
      for (int i = 0; i < last; ++i, mul *= na) code += mul * std::uint64_t(assign[i][pos[i][q[i]]]);
      const int slot = pos[last][q[last]];
      for (int x = 0; x < na; ++x)
        if (accepted[t][code + mul * x]) score[slot * na + x] += nums[t];
    }
    std::int64_t total = 0;
    std::vector<int> reply(supp[last].size());
    for (std::size_t k = 0; k < supp[last].size(); ++k) {
      auto first = score.begin() + std::ptrdiff_t(k * na);
      auto it = std::max_element(first, first + na);
      reply[k] = int(it - first);
      total += *it;
    }
    if (total > best) {
      best = total;
      best_s.table.assign(r, std::vector<int>(g.num_questions(), -1));
      for (int i = 0; i < last; ++i)
        for (std::size_t k = 0; k < supp[i].size(); ++k) best_s.table[i][supp[i][k]] = assign[i][k];
      for (std::size_t k = 0; k < supp[last].size(); ++k) best_s.table[last][supp[last][k]] = reply[k];
    }
    // Odometer over the non-final players' answer tables.
    int i = 0;
    std::size_t k = 0;
    for (; i < last; ++i) {
      for (k = 0; k < assign[i].size(); ++k) {
        if (++assign[i][k] < na) break;
        assign[i][k] = 0;
      }
      if (k < assign[i].size()) break;
    }
    if (i == last) break;
  }
  // Unsupported questions get answer 0 so the strategy is total.
  for (auto& row : best_s.table)
    for (auto& x : row)
      if (x < 0) x = 0;
  return {Rational(best, lcd), best_s};
}

Rational evaluate_exact(const RefereeGame& g, const Strategy& s, std::uint64_t cap) {
  require(s.deterministic(), ErrorKind::InvalidInput, "exact evaluation needs a deterministic strategy");
  auto rounds = g.enumerate(cap);
  require(rounds.has_value(), ErrorKind::InvalidInput, "game '" + g.name() + "' cannot be enumerated");
  Rng unused(0);
  Rational value;
  std::vector<Token> answers(g.players());
  for (const auto& [w, round] : *rounds) {
    if (round.auto_accept) {
      value += w;
      continue;
    }
    for (int i = 0; i < g.players(); ++i)
      answers[i] = round.questions[i].empty() ? Token() : s.answer(i, round.questions[i], unused);
    if (g.accept(round, answers)) value += w;
  }
  return value;
}

RoundTranscript play_round(const RefereeGame& g, const Strategy& s, std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, "round", index);
  Round round = g.sample(rng);
  RoundTranscript t;
  t.index = index;
  t.questions = round.questions;
  t.auto_accept = round.auto_accept;
  if (round.auto_accept) {
    t.accepted = true;
    return t;
  }
  t.answers.resize(g.players());
  for (int i = 0; i < g.players(); ++i)
    if (!round.questions[i].empty()) t.answers[i] = s.answer(i, round.questions[i], rng);
  t.accepted = g.accept(round, t.answers);
  return t;
}

double hoeffding_half_width(std::uint64_t rounds, double confidence) {
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * double(rounds)));
}

MonteCarloResult monte_carlo_value(const RefereeGame& g, const Strategy& s, std::uint64_t rounds, std::uint64_t seed,
                                   int jobs) {
  require(rounds >= 1, ErrorKind::InvalidInput, "need at least one round");
  jobs = std::max(1, std::min<int>(jobs, int(std::min<std::uint64_t>(rounds, 256))));
  std::vector<std::uint64_t> acc(jobs, 0);
  std::vector<std::exception_ptr> errors(jobs);
  auto work = [&](int w) {
    try {
      for (std::uint64_t i = std::uint64_t(w); i < rounds; i += std::uint64_t(jobs))
        acc[w] += play_round(g, s, seed, i).accepted;
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  MonteCarloResult res;
  res.rounds = rounds;
  res.accepted = std::accumulate(acc.begin(), acc.end(), std::uint64_t(0));
  res.estimate = double(res.accepted) / double(rounds);
  res.half_width = hoeffding_half_width(rounds);
  return res;
}

double xor_bias(double value) {
  require(value >= -1e-12 && value <= 1 + 1e-12, ErrorKind::InvalidInput, "value outside [0, 1]");
  return 2 * value - 1;
}

ExplicitGame::Predicate named_checker(const std::string& name) {
  if (name == "always") return [](std::span<const int>, std::span<const int>) { return true; };
  if (name == "never") return [](std::span<const int>, std::span<const int>) { return false; };
  if (name == "chsh")
    return [](std::span<const int> q, std::span<const int> a) { return ((a[0] ^ a[1]) & 1) == (q[0] & q[1] & 1); };
  // Parity of the answer indices must be odd (even).
  if (name == "odd" || name == "even")
    return [odd = name == "odd"](std::span<const int>, std::span<const int> a) {
      int p = 0;
      for (int x : a) p ^= x & 1;
      return p == int(odd);
    };
  fail(ErrorKind::InvalidInput, "unknown checker '" + name + "'");
}

ExplicitGame chsh_game() {
  ExplicitGame g("chsh", 2, {"0", "1"}, {"0", "1"});
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) g.add_question({x, y}, Rational(1, 4));
  g.set_checker("chsh", named_checker("chsh"));
  g.set_xor(true);
  g.set_symmetric(true);
  g.validate();
  return g;
}

}  // namespace nlg
