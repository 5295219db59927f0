#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlg/game.hpp"
#include "nlg/poly.hpp"

namespace nlg {

// Question tokens are "<tag> r1 r2 ..." with a fixed number of residues per
// tag, so the referee can check every answer from the tokens alone:
//   pt x             point of F^m
//   pl s             canonical plane of F^m (base, then both directions)
//   sx s x'          plane of F^m with a point of F^{m'}
//   ss s s'          plane of F^m with a plane of F^{m'}
//   cv c w'          degree <= 3 curve of F^m (4 coefficients per coordinate) with a point of F^{m'}
//   cc c c' k        curve of F^m, curve of F^{m'} and the clause index k
// Field-element answers are a decimal residue; polynomial answers list the
// coefficients (BiPoly raw order, or low to high for univariate answers).
// Malformed or over-degree answers are rejected.

struct LowDegreeParams {
  FieldParams field;
  int d = 1;
  int m = 2;
  int r = 2;

  /// d' = m' = 2 ceil(log2(d + 1)) of the two-level test.
  int d2() const { return 2 * sharp_levels(d); }
  void validate() const;
};

std::string point_token(const Point& x);
std::string plane_token(const AffineSubspace& canonical);
std::optional<Point> parse_point(const std::string& body, const FieldParams& f, int m);
/// Rebuilds a canonical plane from 3m residues; nullopt unless they are in canonical form.
std::optional<AffineSubspace> parse_plane(std::span<const Residue> v, const FieldParams& f, int m);

std::string bipoly_token(const BiPoly& g);
std::optional<BiPoly> parse_bipoly(const std::string& s, const FieldParams& f, int bound);
std::string unipoly_token(const UniPoly& g);
std::optional<UniPoly> parse_unipoly(const std::string& s, const FieldParams& f, int bound);
std::optional<Residue> parse_value(const std::string& s, const FieldParams& f);

// --------------------------------------------------------------------------
// Plane-vs-point low-degree test.

struct LdRound {
  bool auto_accept = false;
  AffineSubspace plane;  // canonical unless auto_accept
  Point x;
  int plane_player = 0, point_player = 1;
};

LdRound ld_round(const LowDegreeParams& p, Rng& rng);
/// Accept iff g, read in the plane's coordinates, takes value a at x. Over-degree g rejects.
bool ld_check(const LowDegreeParams& p, const AffineSubspace& plane, const BiPoly& g, Residue a, const Point& x);

class LowDegreeTest : public RefereeGame {
 public:
  explicit LowDegreeTest(LowDegreeParams p);
  const LowDegreeParams& params() const { return p_; }
  std::string name() const override { return "low-degree"; }
  int players() const override { return p_.r; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t cap) const override;

 private:
  LowDegreeParams p_;
};

/// Answers planes with the restriction of `global` and points with its value.
FunctionStrategy honest_ld_strategy(const LowDegreeParams& p, const MultiPoly& global);

// --------------------------------------------------------------------------
// Two-level test: answers on planes of F^m are replaced by answers on planes
// of F^{m'} after variable substitution.

class TwoLevelTest : public RefereeGame {
 public:
  explicit TwoLevelTest(LowDegreeParams p);
  const LowDegreeParams& params() const { return p_; }
  std::string name() const override { return "two-level"; }
  int players() const override { return p_.r; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  /// Round memo holds the sub-test (1 or 2).
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t cap) const override;

  /// Question sampling shared with the 3-SAT test; fills `players` questions.
  Round sample_into(Rng& rng, int players) const;
  /// Checks the "pt"/"sx"/"ss" question kinds; false if the tokens are not a two-level round.
  bool check(std::span<const Token> questions, std::span<const Token> answers) const;

 private:
  LowDegreeParams p_;
};

/// Per-plane substituted polynomial g'_s in m' variables.
MultiPoly substituted_restriction(const MultiPoly& global, const AffineSubspace& plane, int d);

FunctionStrategy honest_twolevel_strategy(const LowDegreeParams& p, const MultiPoly& global);

/// Second player's question distribution in sub-tests 4.1 and 4.2, conditioned
/// on the sub-test, from exhaustive enumeration.
std::pair<std::map<Token, Rational>, std::map<Token, Rational>> twolevel_second_player_marginals(
    const LowDegreeParams& p, std::uint64_t cap = 1'000'000);

// --------------------------------------------------------------------------
// 3-SAT test.

/// Clauses of up to three signed 1-based literals; shorter clauses repeat
/// their last literal.
struct Cnf {
  int n = 0;
  std::vector<std::array<int, 3>> clauses;

  void validate() const;
  bool satisfied(const std::vector<bool>& assignment, std::size_t clause) const;
  /// Fraction of violated clauses.
  double violated_fraction(const std::vector<bool>& assignment) const;
};

Cnf read_dimacs(std::istream& in);
Cnf parse_dimacs(const std::string& text);
void write_dimacs(std::ostream& out, const Cnf& cnf);

struct SatTestParams {
  int n = 0, h = 0, m = 0, d = 0, d2 = 0;  // d2 = d' = m'
  FieldParams field;

  LowDegreeParams two_level(int r) const { return {field, d, m, r}; }
};

SatTestParams sat_params(int n, const FieldParams& f);

/// Variable i (1-based) sits at the base-(h+1) digits of i - 1, little-endian.
Point variable_point(const SatTestParams& p, int var);
/// Low-degree extension of a 0/1 assignment; unused grid points get 0.
MultiPoly assignment_lde(const SatTestParams& p, const std::vector<bool>& assignment);

class SatTest : public RefereeGame {
 public:
  SatTest(Cnf cnf, const FieldParams& f, int r = 3);
  const Cnf& cnf() const { return cnf_; }
  const SatTestParams& params() const { return p_; }
  const TwoLevelTest& two_level() const { return two_; }
  std::string name() const override { return "3-sat"; }
  int players() const override { return r_; }
  /// Round memo holds the branch: 0 two-level, 1 for step 2.2.1, 2 for step 2.2.2.
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;

  /// Curve through the clause points and w; curve of F^{m'} through #0, #1, #2, w'.
  Curve4 clause_curve(std::size_t clause, const Point& w) const;
  Curve4 sharp_curve(const Point& w2) const;
  std::string curve_token_body(const Curve4& c) const;

 private:
  Cnf cnf_;
  SatTestParams p_;
  int r_;
  TwoLevelTest two_;
};

/// Honest strategy from the low-degree extension of `assignment`; the
/// referee rejects it only on clauses the assignment violates.
FunctionStrategy honest_sat_strategy(const SatTest& test, const std::vector<bool>& assignment);

// --------------------------------------------------------------------------
// Linearity test over F_2.

class LinearityTest : public RefereeGame {
 public:
  explicit LinearityTest(int n, int r = 3);
  int n() const { return n_; }
  std::string name() const override { return "linearity"; }
  int players() const override { return r_; }
  Round sample(Rng& rng) const override;
  bool accept(const Round& round, std::span<const Token> answers) const override;
  std::optional<std::vector<WeightedRound>> enumerate(std::uint64_t cap) const override;
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t) const override {
    return std::vector<Token>{"0", "1"};
  }

 private:
  int n_, r_;
};

/// x -> u . x.
FunctionStrategy linear_strategy(const std::vector<std::uint8_t>& u);

// --------------------------------------------------------------------------
// QUADEQ: sum_{(i,j) in terms} x_i x_j = constant over F_2. Variables are two
// labelled chunks of equal size followed by `naux` unlabelled auxiliary
// variables that only appear in full-assignment questions.

struct QuadEquation {
  std::vector<std::pair<int, int>> terms;  // repeated pairs cancel
  std::uint8_t constant = 0;
};

struct QuadeqInstance {
  int n = 0;
  int naux = 0;
  std::string label1 = "l1", label2 = "l2";
  std::vector<QuadEquation> equations;

  int chunk() const { return (n - naux) / 2; }
  void validate() const;
  bool satisfied(const std::vector<std::uint8_t>& x) const;
  /// a^{(k)} as an n^2 bit vector, index i * n + j.
  std::vector<std::uint8_t> coefficients(std::size_t k) const;
};

/// Header "K n [naux]", then one equation per line: "i j i j ... = c" (0-based).
QuadeqInstance read_quadeq(std::istream& in);
void write_quadeq(std::ostream& out, const QuadeqInstance& inst);

struct QuadeqQuestion {
  int kind = 0;  // 1: (label, u) on one chunk; 2: (label1, label2, v) on all variables or their tensor square
  std::string label1, label2;
  std::vector<std::uint8_t> bits;
};

Token quadeq_question_token(const QuadeqQuestion& q);
std::optional<QuadeqQuestion> parse_quadeq_question(const Token& t);

struct QuadeqMemo {
  int branch = 0;  // 0..3 linearity sub-tests, 4 chunk consistency, 5 tensor, 6 equations
  std::array<int, 3> players{};
  std::vector<std::uint8_t> v;  // branch 6 only
};

/// One referee round with the instance's labels; `players` >= 3.
Round quadeq_round(const QuadeqInstance& inst, int players, Rng& rng);
bool quadeq_check(const QuadeqInstance& inst, const Round& round, std::span<const Token> answers);

/// Honest answer to a QUADEQ question given a full assignment x (including auxiliaries).
Token quadeq_honest_answer(const QuadeqInstance& inst, const std::vector<std::uint8_t>& x, const QuadeqQuestion& q);

class QuadeqTest : public RefereeGame {
 public:
  explicit QuadeqTest(QuadeqInstance inst, int r = 3);
  const QuadeqInstance& instance() const { return inst_; }
  std::string name() const override { return "quadeq"; }
  int players() const override { return r_; }
  Round sample(Rng& rng) const override { return quadeq_round(inst_, r_, rng); }
  bool accept(const Round& round, std::span<const Token> answers) const override {
    return quadeq_check(inst_, round, answers);
  }
  std::optional<std::vector<Token>> answer_alphabet(std::uint64_t) const override {
    return std::vector<Token>{"0", "1"};
  }
  bool token_checkable() const override { return false; }

 private:
  QuadeqInstance inst_;
  int r_;
};

FunctionStrategy honest_quadeq_strategy(const QuadeqInstance& inst, const std::vector<std::uint8_t>& x);

// --------------------------------------------------------------------------

/// Explicit table for an enumerable referee: exact rational weights merged
/// per question tuple, unqueried players get the label "-", and the predicate
/// calls back into the referee. TooLarge beyond `cap` rounds or answers.
ExplicitGame compile_to_table(std::shared_ptr<const RefereeGame> g, std::uint64_t cap = 1'000'000);

}  // namespace nlg
