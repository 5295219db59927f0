#pragma once

#include <vector>

#include "nlg/quantum.hpp"

namespace nlg {

/// State on `registers` copies of C^dim; register 0 is the most significant factor.
struct MultiRegisterState {
  int registers = 2;
  int dim = 2;
  Vec amp;

  std::vector<int> dims() const { return std::vector<int>(registers, dim); }
  void validate(double tol = kCompletenessSlack) const;
  /// Max over transpositions of ||P Psi - Psi||.
  double permutation_residual() const { return swap_invariance_residual(amp, dims()); }
};

/// (|0..0> + ... + |d-1..d-1>) / sqrt(d).
MultiRegisterState ghz_state(int registers, int dim = 2);
/// sum_i sqrt(lambda_i) |i..i>; lambda is normalized to sum 1.
MultiRegisterState schmidt_state(const Eigen::VectorXd& lambda, int registers = 2);
/// Reduced density on one register.
Mat reduced_density(const MultiRegisterState& s, int reg = 0);

/// Positive operators summing to at most the identity.
struct SubMeasurement {
  std::vector<Mat> elems;
  bool projective = false;

  Mat total() const;
  /// PSD floor, sum <= Id, and ||E^2 - E|| <= 1e-8 when `projective` is claimed.
  void validate(double tol = kCompletenessSlack) const;
};

/// <Psi| A (x) B (x) Id |Psi> with A on register ia and B on register ib.
cplx pairwise_form(const Mat& a, const Mat& b, const MultiRegisterState& s, int ia = 0, int ib = 1);
/// Tr_rho(A) = <Psi| A (x) Id |Psi>.
cplx trace_rho(const Mat& a, const MultiRegisterState& s, int reg = 0);
/// ||A||_Psi from A A^dagger, or the primed norm from A^dagger A.
double state_norm(const Mat& a, const MultiRegisterState& s, bool dagger_first = false);

struct ConsistencyMetrics {
  double delta = 0;  // consistency with the point measurements
  double gamma = 0;  // projectivity Tr_rho(M (x) (Id - M))
  double eta = 0;    // completeness 1 - Tr_rho(M)
};

/// M[g] indexed by function, values[g][v] = g(v), A[v][a] per point, with a
/// point distribution `weights` (uniform when empty).
ConsistencyMetrics consistency_metrics(const std::vector<Mat>& m, const std::vector<std::vector<int>>& values,
                                       const std::vector<std::vector<Mat>>& a, const MultiRegisterState& s,
                                       const std::vector<double>& weights = {});

/// Self-consistency E_v sum_a <A_v^a, Id - A_v^a>.
double self_consistency(const std::vector<std::vector<Mat>>& a, const MultiRegisterState& s,
                        const std::vector<double>& weights = {});

struct Closeness {
  double lhs = 0;             // sum_a ||A^a - B^a||_Psi^2
  double delta = 0;           // 1 - sum_a <A^a, B^a>
  double bound = 0;           // 2 delta + 4 sqrt(delta)
  double rigorous_bound = 0;  // 2 delta + 4 sqrt(2 delta)
};

/// Needs r >= 3. Both bounds are reported; callers decide which to enforce.
Closeness closeness_from_consistency(const std::vector<Mat>& a, const std::vector<Mat>& b, const MultiRegisterState& s);

struct RobustTripleSpec {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;  // undirected
  int outcomes = 0;
  std::vector<std::vector<Mat>> a;          // a[v][outcome], complete per vertex
  std::vector<std::vector<int>> functions;  // functions[g][v] in [0, outcomes)

  void validate() const;
  std::vector<std::vector<int>> neighbors() const;
};

struct RobustTripleMetrics {
  double self_consistency = 0;   // delta_1
  double max_intersection = 0;   // delta_2
  double stability = 0;          // delta_3 for the probe sub-measurement
  std::vector<double> mixing;    // E_v ||p_k(v) - u||_1 for k = 1..steps
};

/// Random walks move to a uniform neighbor, never staying put.
RobustTripleMetrics robust_triple_metrics(const RobustTripleSpec& spec, const MultiRegisterState& s,
                                          const std::vector<Mat>& probe, int mixing_steps = 8);

struct CannedStrategy {
  ExplicitGame game;
  QuantumStrategy strategy;
};

/// EPR pair; Alice measures observables at angles 0 and pi/4, Bob at +-pi/8.
CannedStrategy chsh_canned();

}  // namespace nlg
