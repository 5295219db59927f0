#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nlg/protocols.hpp"

namespace nlg {

struct ReductionConfig {
  double eps1 = 1.0;      // target soundness gap of the 3-SAT game; sets the field size
  int exponent = 3;       // field size ~ (log2 n / eps1)^exponent
  std::uint64_t q = 0;    // explicit field size; 0 picks one from eps1 and exponent
  int repeat_k = 8, repeat_k2 = 8;  // real and confuse pairs of the repetition stage
  double xor_eps = 0.05;  // noise rate of the XOR stage
  int xor_k = 1, xor_k2 = 1;
  int max_subset = 16;    // largest variable set the XOR stage tabulates
  int max_answer_bits = 8;  // widest answer the binarization encodes

  void validate() const;
};

using StrategyPtr = std::shared_ptr<const Strategy>;
using GamePtr = std::shared_ptr<const RefereeGame>;

// --------------------------------------------------------------------------
// 3-SAT game and the clause/variable game.

struct FieldChoice {
  std::uint64_t q = 0;
  double lo = 0, hi = 0;  // final search interval
  int widenings = 0;
};

/// Smallest prime in [x, 2x] for x = (log2 n / eps1)^exponent, doubling the
/// interval until one is found, and at least max(h + 1, 4).
FieldChoice choose_field(int n, const ReductionConfig& cfg);

struct QuestionLengths {
  int field_bits = 0;
  int bound_bits = 0;    // 6 m ceil(log2 q)
  int longest_two_level = 0;  // ss question: (3m + 3m') ceil(log2 q)
  int longest = 0;       // longest question of any kind
  int longest_answer = 0;
};

struct GphiGame {
  std::shared_ptr<const SatTest> game;
  FieldChoice field;
  QuestionLengths lengths;
};

GphiGame build_game_Gphi(const Cnf& cnf, const ReductionConfig& cfg);

/// Three players, two of them queried: one gets a clause ("c k") and answers
/// the bits of its three literal variables, the other gets one of those
/// variables ("v i") and answers its bit. Accept iff the clause is satisfied
/// and the answers agree.
class ClauseVariableGame : public RefereeGame {
 public:
  explicit ClauseVariableGame(Cnf cnf);
  const Cnf& cnf() const { return cnf_; }
  std::string name() const override { return "clause-variable"; }
  int players() const override { return 3; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t cap) const override;

 private:
  Cnf cnf_;
};

FunctionStrategy honest_clause_strategy(const Cnf& cnf, const std::vector<bool>& assignment);

// --------------------------------------------------------------------------
// Predicates as QUADEQ instances.

/// y = (u + cu)(v + cv) over F_2; u, v index earlier variables.
struct Gate {
  int u = 0, v = 0;
  std::uint8_t cu = 0, cv = 0;
};

struct QuadeqEncoding {
  QuadeqInstance instance;  // inputs 0..2m-1, then one auxiliary variable per gate
  std::vector<Gate> gates;
  std::string circuit;  // "anf", "accepting minterms" or "rejecting minterms"

  /// Full assignment for the given 2m input bits.
  std::vector<std::uint8_t> complete(const std::vector<std::uint8_t>& inputs) const;
};

/// `accept(bits)` over 2m bits, bit i of the index being input i (a1 in bits
/// 0..m-1, a2 in bits m..2m-1). Uses the smallest of three canonical circuits.
QuadeqEncoding predicate_to_quadeq(const std::function<bool(std::uint32_t)>& accept, int m);

// --------------------------------------------------------------------------
// Binary-answer game: QUADEQ test on the predicate of each question pair.

class BinarizedGame : public RefereeGame {
 public:
  BinarizedGame(GamePtr g1, const ReductionConfig& cfg);
  const RefereeGame& source() const { return *g1_; }
  int answer_bits() const { return m_; }
  const std::vector<Token>& alphabet() const { return alphabet_; }
  std::string name() const override { return "binary(" + g1_->name() + ")"; }
  int players() const override { return 3; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t) const override {
    return std::vector<Token>{"0", "1"};
  }
  bool token_checkable() const override { return false; }

  /// Encoding of V(. , . | q1, q2), cached.
  std::shared_ptr<const QuadeqEncoding> psi(const Token& q1, const Token& q2) const;
  /// Bits of an answer's code, little-endian; nullopt outside the alphabet.
  std::optional<std::vector<std::uint8_t>> encode(const Token& answer) const;

 private:
  GamePtr g1_;
  std::vector<Token> alphabet_;
  std::unordered_map<Token, std::uint32_t> code_;
  int m_ = 0;
  mutable std::mutex mu_;
  mutable std::map<std::pair<Token, Token>, std::shared_ptr<const QuadeqEncoding>> cache_;
};

/// Lifts a deterministic strategy of the source game.
FunctionStrategy lift_binarized(std::shared_ptr<const BinarizedGame> g, StrategyPtr base);

// --------------------------------------------------------------------------
// Oracularization: one player answers a whole question tuple, another one
// coordinate of it.

/// Questions: "T" + pack(tuple) or "S" + question. Answers to a tuple: pack of
/// per-coordinate answers ("" where unqueried).
class OracularGame : public RefereeGame {
 public:
  explicit OracularGame(GamePtr g1);
  const RefereeGame& source() const { return *g1_; }
  std::string name() const override { return "oracular(" + g1_->name() + ")"; }
  int players() const override { return 3; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t cap) const override;
  bool token_checkable() const override { return g1_->token_checkable(); }

 private:
  GamePtr g1_;
};

FunctionStrategy lift_oracular(StrategyPtr base);

// --------------------------------------------------------------------------
// Repetition with confuse questions over a two-role view of a game.

struct PairRound {
  bool auto_accept = false;
  Token first, second;  // first role: the tuple player of an oracularized game
  std::any memo;        // source round
};

class PairView {
 public:
  explicit PairView(GamePtr g);
  const RefereeGame& game() const { return *g_; }
  PairRound sample(Rng& rng) const;
  bool check(const PairRound& r, const Token& a1, const Token& a2) const;
  std::optional<std::vector<std::pair<Rational, PairRound>>> enumerate(std::uint64_t cap) const;

 private:
  PairRound from_round(Round round) const;
  GamePtr g_;
};

/// Questions and answers are packed lists of K + K' entries.
class RepeatedGame : public RefereeGame {
 public:
  RepeatedGame(GamePtr g, int k, int k2);
  const PairView& view() const { return view_; }
  int k() const { return k_; }
  int k2() const { return k2_; }
  std::string name() const override;
  int players() const override { return 3; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  /// Only without confuse pairs.
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;
  bool token_checkable() const override { return false; }

 private:
  PairView view_;
  int k_, k2_;
};

struct RepeatedMemo {
  std::vector<int> slot_of;  // slot_of[j] = position of pair j (real pairs first)
  std::vector<PairRound> pairs;
  int first_player = 0, second_player = 1;
};

FunctionStrategy lift_repeated(StrategyPtr base);

// --------------------------------------------------------------------------
// 3-player XOR game with folded truth-table questions.

/// Truth table over {+-1}^vars; entry y has bit j set when variable j is -1
/// ("true"), and the stored bit is 1 when the value is -1.
struct FoldedTable {
  std::vector<Token> vars;  // sorted
  std::vector<std::uint8_t> table;
};

/// Representative of {f, -f}: the member with value +1 on the all-(+1)
/// input. Returns the representative and whether f was negated.
std::pair<FoldedTable, bool> fold(FoldedTable f);
Token folded_token(const FoldedTable& f);
std::optional<FoldedTable> parse_folded(const Token& t);

struct XorMemo {
  std::array<bool, 3> sign{};  // per player: the table sent is -f rather than f
};

class XorGadgetGame : public RefereeGame {
 public:
  XorGadgetGame(GamePtr g1, double eps, int k, int k2, int max_subset = 16);
  double eps() const { return eps_; }
  std::string name() const override;
  int players() const override { return 3; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t) const override {
    return std::vector<Token>{"0", "1"};
  }
  bool is_xor() const override { return true; }
  bool token_checkable() const override { return false; }

 private:
  GamePtr g1_;
  double eps_;
  int k_, k2_, max_subset_;
};

/// Answers each table at the point given by `base` on its variables.
FunctionStrategy lift_xor(StrategyPtr base);

// --------------------------------------------------------------------------
// Fourier analysis of functions F_U -> {+-1}.

/// A over all 2^(2^|U|) functions f: {+-1}^U -> {+-1}; f is indexed by its
/// bit mask (bit x set when f(x) = -1), alpha likewise by a subset mask.
struct FourierTable {
  int u = 0;
  std::vector<double> coeff;  // coeff[alpha] = E_f chi_alpha(f) A_f

  double parseval() const;
};

FourierTable fourier_transform(int u, const std::function<int(std::uint32_t)>& a);
/// Samples alpha with probability coeff^2 and returns a uniform point of
/// alpha; a uniform point when alpha is empty.
std::uint32_t decode_sample(const FourierTable& t, Rng& rng);

/// Z(g)_i = [g(point of variable i) != 0].
std::vector<bool> decode_assignment(const MultiPoly& g, const SatTestParams& p);

// --------------------------------------------------------------------------
// Compilation pipeline.

struct Stage {
  std::string name;
  GamePtr game;
  std::function<StrategyPtr(const std::vector<bool>&)> honest;
  std::vector<std::pair<std::string, std::string>> info;
};

/// Stages up to `last` in {gphi, binary, oracular, repeat, xor}. The binary
/// stage encodes the 3-SAT game when its answers fit max_answer_bits and the
/// clause/variable game otherwise; oracular and repeat build on binary, and
/// xor builds on binary.
std::vector<Stage> build_pipeline(const Cnf& cnf, const std::string& last, const ReductionConfig& cfg);

}  // namespace nlg
