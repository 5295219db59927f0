#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nlg/game.hpp"
#include "nlg/quantum.hpp"
#include "nlg/quantumlab.hpp"

namespace nlg {

/// 17 significant digits, enough to round-trip a double.
std::string format_double(double x);

/// Labels are written raw when they are printable, space-free ASCII not
/// starting with '%'; anything else becomes '%' followed by hex bytes.
std::string encode_label(const std::string& s);
std::string decode_label(const std::string& s);

// Game tables:
//
//   nlg-game 1
//   name <label>
//   header <r> <|Q|> <|A|> [xor] [symmetric]
//   questions            then |Q| labels, one per line
//   answers              then |A| labels
//   pi <N>               then N lines "q1 .. qr num/den" (question indices)
//   accept checker <name>
//   accept table <M>     then M lines "q1 .. qr a1 .. ar"
//   end
//
// Checkers that cannot be reloaded by name are written out as tables;
// TooLarge when that needs more than `cap` predicate calls.
void write_game(std::ostream& out, const ExplicitGame& g, std::uint64_t cap = 10'000'000);
ExplicitGame read_game(std::istream& in);

// Deterministic strategies: "nlg-strategy deterministic" then one
// "player question answer" triple per line (labels encoded as above).
void write_deterministic(std::ostream& out, const ExplicitGame& g, const DeterministicStrategy& s);
DeterministicStrategy read_deterministic(std::istream& in, const ExplicitGame& g);

// Complex blocks: "matrix <rows> <cols>" or "vector <n>", then row-major
// "re im" pairs, one row per line.
void write_matrix(std::ostream& out, const Mat& m);
Mat read_matrix(std::istream& in);
void write_vector(std::ostream& out, const Vec& v);
Vec read_vector(std::istream& in);

// Quantum strategies:
//
//   nlg-strategy quantum
//   dims d1 .. dr
//   state               then a vector block
//   povm <player> <question label> <k>
//   element <answer label>, then a matrix block, k times
//   end
void write_quantum(std::ostream& out, const ExplicitGame& g, const QuantumStrategy& s);
QuantumStrategy read_quantum(std::istream& in, const ExplicitGame& g);

/// Input of the metric commands: a state, point measurements A_v, functions
/// g: V -> outcomes with optional sub-measurement elements M^g, graph edges
/// and a probe sub-measurement.
///
///   nlg-metrics 1
///   state <registers> <dim>     then a vector block
///   points <V> <outcomes>
///   weights w_1 .. w_V          optional
///   point <v>                   then <outcomes> matrix blocks
///   function <v_1 .. v_V>       values g(v); optionally followed by "element" + matrix
///   edge <u> <v>
///   probe <k>                   then k matrix blocks
///   end
struct MetricsInput {
  MultiRegisterState state;
  int points = 0, outcomes = 0;
  std::vector<double> weights;
  std::vector<std::vector<Mat>> a;
  std::vector<std::vector<int>> values;
  std::vector<Mat> m;  // empty, or one per function
  std::vector<std::pair<int, int>> edges;
  std::vector<Mat> probe;
};

MetricsInput read_metrics(std::istream& in);
void write_metrics(std::ostream& out, const MetricsInput& x);

}  // namespace nlg
