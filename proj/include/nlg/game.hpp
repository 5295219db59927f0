#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nlg/rational.hpp"
#include "nlg/rng.hpp"

namespace nlg {

/// Opaque binary-safe question or answer token. Tokens are never empty; an
/// empty question means the player is not queried in that round.
using Token = std::string;

struct Round {
  std::vector<Token> questions;
  bool auto_accept = false;
  std::any memo;  // sampler-private data reused by the checker
};

struct WeightedRound {
  Rational weight;
  Round round;
};

/// A referee: samples question tuples and decides acceptance. Sampler-backed
/// games only implement sample/accept; enumerate() is provided when the round
/// distribution can be listed exactly.
class RefereeGame {
 public:
  virtual ~RefereeGame() = default;
  virtual std::string name() const = 0;
  virtual int players() const = 0;
  virtual Round sample(Rng& rng) const = 0;
  virtual bool accept(const Round& round, std::span<const Token> answers) const = 0;
  virtual std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const {
    (void)cap;
    return std::nullopt;
  }
  virtual bool is_xor() const { return false; }
  /// Every answer token any player may send, when that set is small enough to list.
  virtual std::optional<std::vector<Token>> answer_alphabet(std::uint64_t cap) const {
    (void)cap;
    return std::nullopt;
  }
  /// False when accept() needs referee-private data carried in Round::memo,
  /// so the predicate is not a function of the question tokens alone.
  virtual bool token_checkable() const { return true; }
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual Token answer(int player, const Token& question, Rng& rng) const = 0;
  /// Randomized strategies cannot be evaluated exactly by enumeration.
  virtual bool deterministic() const { return true; }
};

/// Strategy backed by a callable, handy for honest strategies and tests.
class FunctionStrategy : public Strategy {
 public:
  using Fn = std::function<Token(int, const Token&, Rng&)>;
  explicit FunctionStrategy(Fn fn, bool deterministic = true) : fn_(std::move(fn)), det_(deterministic) {}
  Token answer(int player, const Token& q, Rng& rng) const override { return fn_(player, q, rng); }
  bool deterministic() const override { return det_; }

 private:
  Fn fn_;
  bool det_;
};

/// Game in explicit form: shared question and answer label sets, exact
/// rational distribution over question-index tuples and a predicate.
class ExplicitGame : public RefereeGame {
 public:
  using Predicate = std::function<bool(std::span<const int> q, std::span<const int> a)>;

  ExplicitGame(std::string name, int players, std::vector<std::string> questions, std::vector<std::string> answers);

  std::string name() const override { return name_; }
  int players() const override { return r_; }
  const std::vector<std::string>& question_labels() const { return q_; }
  const std::vector<std::string>& answer_labels() const { return a_; }
  int num_questions() const { return int(q_.size()); }
  int num_answers() const { return int(a_.size()); }
  /// |G| = |Q| * |A|.
  std::uint64_t size() const { return std::uint64_t(q_.size()) * a_.size(); }

  /// Adds probability mass to a question tuple (tuples may repeat; masses add).
  void add_question(std::vector<int> q, Rational weight);
  const std::vector<std::pair<std::vector<int>, Rational>>& distribution() const { return pi_; }

  /// Predicate as an explicit list of accepted (question, answer) tuples.
  void set_accept_table(std::vector<std::pair<std::vector<int>, std::vector<int>>> accepted);
  /// Predicate delegated to a named checker.
  void set_checker(std::string checker_name, Predicate p);
  bool has_table() const { return table_.has_value(); }
  const std::string& checker_name() const { return checker_; }
  bool predicate(std::span<const int> q, std::span<const int> a) const;

  void set_xor(bool v) { xor_ = v; }
  bool is_xor() const override { return xor_; }
  /// Claims symmetry; verified by validate().
  void set_symmetric(bool v) { symmetric_ = v; }
  bool symmetric() const { return symmetric_; }

  /// Checks weights sum to exactly 1, indices are in range, and the symmetry
  /// claim when made. Throws InvalidInput.
  void validate() const;
  /// Whether pi and V are invariant under simultaneous permutation of players.
  bool check_symmetry() const;

  /// Question indices player i can receive with positive probability.
  std::vector<int> support(int player) const;

  int question_index(const Token& t) const;
  int answer_index(const Token& t) const;

  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t) const override { return a_; }

 private:
  std::string name_;
  int r_;
  std::vector<std::string> q_, a_;
  std::unordered_map<std::string, int> qidx_, aidx_;
  std::vector<std::pair<std::vector<int>, Rational>> pi_;
  std::optional<std::vector<std::pair<std::vector<int>, std::vector<int>>>> table_;
  std::unordered_set<std::string> table_lookup_;
  std::string checker_;
  Predicate pred_;
  bool xor_ = false;
  bool symmetric_ = false;
  // Cumulative weights for sampling, as doubles; exactness is kept in pi_.
  std::vector<double> cdf_;
};

/// Per-player answer tables f_i: Q -> A (-1 = undefined).
struct DeterministicStrategy {
  std::vector<std::vector<int>> table;
};

class DeterministicAdapter : public Strategy {
 public:
  DeterministicAdapter(const ExplicitGame& g, DeterministicStrategy s) : g_(g), s_(std::move(s)) {}
  Token answer(int player, const Token& question, Rng& rng) const override;

 private:
  const ExplicitGame& g_;
  DeterministicStrategy s_;
};

/// Exact acceptance probability of a deterministic strategy tuple.
Rational evaluate_deterministic(const ExplicitGame& g, const DeterministicStrategy& s);

struct ClassicalOptimum {
  Rational value;
  DeterministicStrategy strategy;
};

/// Exact classical value by exhausting all deterministic strategies (the last
/// player best-responds). TooLarge if prod_i |A|^{|Q_i|} exceeds cap.
ClassicalOptimum classical_value_bruteforce(const ExplicitGame& g, std::uint64_t cap = 10'000'000);

/// Exact value of a deterministic strategy against any enumerable referee.
Rational evaluate_exact(const RefereeGame& g, const Strategy& s, std::uint64_t cap = 1'000'000);

struct RoundTranscript {
  std::uint64_t index = 0;
  std::vector<Token> questions;
  std::vector<Token> answers;
  bool auto_accept = false;
  bool accepted = false;
};

/// Plays round `index` of the run seeded by `seed`; identical for any schedule.
RoundTranscript play_round(const RefereeGame& g, const Strategy& s, std::uint64_t seed, std::uint64_t index);

struct MonteCarloResult {
  std::uint64_t rounds = 0;
  std::uint64_t accepted = 0;
  double estimate = 0;
  double half_width = 0;  // 99% Hoeffding
};

double hoeffding_half_width(std::uint64_t rounds, double confidence = 0.99);

MonteCarloResult monte_carlo_value(const RefereeGame& g, const Strategy& s, std::uint64_t rounds, std::uint64_t seed,
                                   int jobs = 1);

/// 2 * value - 1; InvalidInput outside [0, 1].
double xor_bias(double value);

/// Predicates referenced by name from game files.
ExplicitGame::Predicate named_checker(const std::string& name);

/// CHSH: uniform bits q1, q2; accept iff a1 xor a2 = q1 and q2.
ExplicitGame chsh_game();

}  // namespace nlg
