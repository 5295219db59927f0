#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "nlg/game.hpp"

namespace nlg {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

constexpr double kPsdFloor = 1e-10;
constexpr double kCompletenessSlack = 1e-10;
constexpr double kImagResidue = 1e-9;

/// Applies `op` to register `k` of a state on registers with dimensions `dims`.
/// Register 0 is the most significant tensor factor.
Vec apply_on_register(const Vec& psi, const std::vector<int>& dims, int k, const Mat& op);

/// Permutes registers: position j of the output holds register perm[j] of the input.
Vec permute_registers(const Vec& psi, const std::vector<int>& dims, const std::vector<int>& perm);

Vec swap_registers(const Vec& psi, const std::vector<int>& dims, int i, int j);

double min_eigenvalue(const Mat& h);
bool is_psd(const Mat& h, double floor = kPsdFloor);
/// Hermitian square root of a PSD matrix (negative eigenvalues clipped).
Mat psd_sqrt(const Mat& h);

/// Shared state plus, per player and per question index, a POVM indexed by
/// answer. Questions a player never receives may have an empty POVM.
struct QuantumStrategy {
  std::vector<int> dims;
  Vec state;
  std::vector<std::vector<std::vector<Mat>>> povms;

  std::size_t total_dim() const;
  /// Norm, PSD and completeness checks; InvariantViolation with details.
  void validate(double tol = kCompletenessSlack) const;
};

/// sum_q pi(q) sum_a V(a|q) <Psi| (x)_i A_{i,q_i}^{a_i} |Psi>.
double evaluate_quantum(const ExplicitGame& g, const QuantumStrategy& s, std::size_t dim_cap = 1u << 12);

/// Strategy whose player i measures register i in the computational basis
/// and answers f_i(q); the state is a product basis vector.
QuantumStrategy embed_deterministic(const ExplicitGame& g, const DeterministicStrategy& s);

/// Symmetric strategy with the same value: each register gains a label in
/// C^r, the state is the uniform superposition over permutations sigma of
/// |sigma(1)..sigma(r)> (x) Psi^sigma, and every player uses the same
/// label-controlled POVM. InvalidInput unless the game is symmetric.
QuantumStrategy symmetrize(const ExplicitGame& g, const QuantumStrategy& s, std::size_t dim_cap = 1u << 12);

/// Max over register transpositions of ||P Psi - Psi||.
double swap_invariance_residual(const Vec& psi, const std::vector<int>& dims);

}  // namespace nlg
