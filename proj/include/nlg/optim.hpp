#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "nlg/error.hpp"
#include "nlg/game.hpp"
#include "nlg/quantum.hpp"
#include "nlg/quantumlab.hpp"

namespace nlg {

enum class Sense { Eq, Le, Ge };

/// One scalar constraint sum_k Tr(lhs[k] X_k) (sense) rhs. An empty lhs[k]
/// means block k does not appear.
struct SdpConstraint {
  std::vector<Mat> lhs;
  double rhs = 0;
  Sense sense = Sense::Eq;
};

/// maximize sum_k Tr(C_k X_k) over PSD blocks X_k subject to scalar linear
/// constraints. Hermitian problems are solved through the real embedding
/// H -> [[Re H, -Im H], [Im H, Re H]]; otherwise all data must be real.
struct SdpProblem {
  std::vector<int> blocks;
  bool hermitian = false;
  std::vector<Mat> objective;  // empty entry = zero
  std::vector<SdpConstraint> constraints;

  int add_block(int n);
  int total_dim() const;
  void validate() const;
};

/// Adds the scalar constraints sum_t coeff_t X_{block_t} = rhs entrywise
/// (real and imaginary parts of the upper triangle). Returns the index of the
/// first constraint added; `dual_matrix` reassembles the multipliers.
std::size_t add_matrix_equality(SdpProblem& p, const std::vector<std::pair<int, double>>& terms, const Mat& rhs);

struct SdpOptions {
  double tol = 1e-7;
  int max_iterations = 10000;
};

struct SdpIteration {
  int iteration = 0;
  double primal = 0, dual = 0, complementarity = 0;
  double primal_residual = 0, dual_residual = 0;
  double step_primal = 0, step_dual = 0;
};

struct SdpSolution {
  std::vector<Mat> primal;  // X_k
  std::vector<Mat> dual;    // Z_k = sum_i y_i A_i,k - C_k
  std::vector<double> y;
  double primal_value = 0, dual_value = 0, gap = 0;
  double primal_residual = 0, dual_residual = 0;
  bool converged = false;
  std::vector<SdpIteration> log;
};

/// Thrown by solve_sdp on failure; carries the best iterate seen.
class SdpUnsolved : public Error {
 public:
  SdpUnsolved(const std::string& what, SdpSolution best) : Error(ErrorKind::Unsolved, what), best_(std::move(best)) {}
  const SdpSolution& best() const { return best_; }

 private:
  SdpSolution best_;
};

/// Infeasible-start primal-dual interior point (HKM direction with a Mehrotra
/// corrector). Deterministic. Total block dimension is capped at 200.
SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts = {});

/// Multiplier matrix sum_k y_k H_k for constraints added by add_matrix_equality.
Mat dual_matrix(const SdpSolution& s, const SdpProblem& p, std::size_t first, int n);

/// SDPA sparse format of the real (embedded) problem, in the SDPA sign
/// convention: minimize sum b_i y_i s.t. sum y_i F_i - F_0 >= 0.
void write_sdpa(std::ostream& out, const SdpProblem& p);

// ---------------------------------------------------------------------------
// Consolidation SDP: max sum_g Tr(T^g B_g), B_g = rho^{1/2} Abar^g rho^{1/2},
// T^g >= 0, sum T^g <= Id; dual min Tr X, X >= B_g, X >= 0.

struct ConsolidationResult {
  std::vector<Mat> t;  // normalized so that sum_g T^g = Id
  Mat x;
  Mat sqrt_rho;
  double omega = 0;       // primal value before normalization
  double dual_value = 0;  // Tr X
  double gap = 0;
  double slack_absorbed = 0;            // ||Id - sum_g T^g|| of the raw solution
  double normalization_residual = 0;    // ||Id - sum_g T^g|| after absorbing
  std::vector<double> slackness;        // per g: max of ||T X - T B||, ||X T - B T||
  double max_slackness = 0;
  double dual_violation = 0;            // max over g of -lambda_min(X - B_g), and of -lambda_min(X)
  int iterations = 0;
};

/// rho must be PSD with unit trace; a singular rho is handled on its support.
/// Each Abar^g must satisfy 0 <= Abar^g <= Id.
ConsolidationResult consolidation_sdp(const Mat& rho, const std::vector<Mat>& abar, const SdpOptions& opts = {1e-11, 10000});

/// sum_g Tr(T^g rho^{1/2} Abar^g rho^{1/2}) for a caller-supplied family.
double consolidation_objective(const Mat& rho, const std::vector<Mat>& abar, const std::vector<Mat>& t);

/// S^g = E_v A_v^{g(v)} T^g A_v^{g(v)}; values[g][v] = g(v), a[v][x] the point
/// measurements. The output is validated as a sub-measurement.
std::vector<Mat> improved_submeasurement(const std::vector<Mat>& t, const std::vector<std::vector<Mat>>& a,
                                         const std::vector<std::vector<int>>& values,
                                         const std::vector<double>& weights = {});

/// Abar^g for a two-register state whose amplitude matrix is rho^{1/2}: the
/// entrywise conjugate of A^g = E_v A_v^{g(v)}.
std::vector<Mat> averaged_conjugates(const std::vector<std::vector<Mat>>& a, const std::vector<std::vector<int>>& values,
                                     const std::vector<double>& weights = {});

/// End-to-end run of the consolidation step on a two-register state whose
/// amplitude matrix equals rho^{1/2} (so <A, B> = Tr(A rho^{1/2} conj(B) rho^{1/2})).
struct ConsolidationAudit {
  ConsolidationResult sdp;
  std::vector<Mat> s;
  double trace_s = 0;           // Tr_rho(S)
  double self_consistency = 0;  // measured delta-hat of A
  double bound = 0;             // omega - 2 sqrt(2 delta-hat), proven for projective A
  double margin = 0;            // trace_s - bound
  double loose_margin = 0;      // trace_s - (omega - 2 sqrt(delta-hat))
  bool passed = false;
};

ConsolidationAudit audit_consolidation(const MultiRegisterState& s, const std::vector<std::vector<Mat>>& a,
                                       const std::vector<std::vector<int>>& values,
                                       const std::vector<double>& weights = {}, const SdpOptions& opts = {1e-11, 10000});

/// |Phi> = (Id - R)^{(x) r} |Psi> / z with the residuals controlling it.
struct ComplementState {
  MultiRegisterState phi;
  double z = 0;
  double delta = 0;     // <R, Id - R>
  double residual = 0;  // ||(Id-R)^{(x) r} Psi - (Id^{(x) r-1} (x) (Id-R)) Psi||^2
  double bound = 0;     // r^2 delta
  double z_floor = 0;   // 1 - <R, Id> - 3 r sqrt(delta)
};

ComplementState complement_state(const MultiRegisterState& s, const Mat& r);

// ---------------------------------------------------------------------------

struct XorSdpResult {
  double bias = 0;
  Eigen::MatrixXd gram;  // player 0 questions first, then player 1
  SdpSolution solution;
};

/// Quantum bias of a two-player XOR game: max sum pi(s,t) c(s,t) <u_s, v_t>
/// over unit vectors.
XorSdpResult xor_bias_sdp_2player(const ExplicitGame& g, const SdpOptions& opts = {1e-9, 10000});

struct SeesawResult {
  double value = 0;
  QuantumStrategy strategy;
  std::vector<std::vector<double>> sweeps;  // per restart, value after each sweep
  int best_restart = 0;
};

/// Alternating optimization of each player's POVMs (an SDP per question) and
/// of the state (top eigenvector). The first restart starts from `init` when given.
SeesawResult seesaw_lower_bound(const ExplicitGame& g, const std::vector<int>& dims, int restarts, int iters,
                                std::uint64_t seed, const std::optional<QuantumStrategy>& init = std::nullopt);

}  // namespace nlg
