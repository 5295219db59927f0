#pragma once

#include "nlg/quantum.hpp"
#include "nlg/quantumlab.hpp"

namespace gen {

inline nlg::Mat gaussian(int rows, int cols, nlg::Rng& rng) {
  nlg::Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = nlg::cplx(rng.normal(), rng.normal());
  return m;
}

inline nlg::Vec random_state(std::size_t dim, nlg::Rng& rng) {
  nlg::Vec v = gaussian(int(dim), 1, rng);
  return v / v.norm();
}

inline nlg::Mat random_unitary(int d, nlg::Rng& rng) {
  Eigen::HouseholderQR<nlg::Mat> qr(gaussian(d, d, rng));
  return qr.householderQ();
}

inline nlg::Mat random_hermitian(int d, nlg::Rng& rng) {
  const nlg::Mat g = gaussian(d, d, rng);
  return (g + g.adjoint()) / 2;
}

// Rank-one projective measurement in a random basis, grouped into `outcomes` parts.
inline std::vector<nlg::Mat> random_projective(int d, int outcomes, nlg::Rng& rng) {
  const nlg::Mat u = random_unitary(d, rng);
  std::vector<nlg::Mat> out(outcomes, nlg::Mat::Zero(d, d));
  for (int k = 0; k < d; ++k) out[k % outcomes] += u.col(k) * u.col(k).adjoint();
  return out;
}

// General POVM: S^{-1/2} G_a S^{-1/2} with G_a random PSD and S their sum.
inline std::vector<nlg::Mat> random_povm(int d, int outcomes, nlg::Rng& rng) {
  std::vector<nlg::Mat> g;
  nlg::Mat s = nlg::Mat::Zero(d, d);
  for (int a = 0; a < outcomes; ++a) {
    const nlg::Mat x = gaussian(d, d, rng);
    g.push_back(x * x.adjoint());
    s += g.back();
  }
  Eigen::SelfAdjointEigenSolver<nlg::Mat> es(s);
  const nlg::Mat inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().cast<nlg::cplx>().asDiagonal() *
      es.eigenvectors().adjoint();
  for (auto& x : g) {
    x = inv_sqrt * x * inv_sqrt;
    x = (x + x.adjoint()) / 2;
  }
  return g;
}

// Permutation-invariant state on r copies of C^d: symmetrized random vector.
inline nlg::MultiRegisterState random_symmetric_state(int r, int d, nlg::Rng& rng) {
  nlg::MultiRegisterState s{r, d, {}};
  std::size_t total = 1;
  for (int i = 0; i < r; ++i) total *= std::size_t(d);
  const nlg::Vec base = random_state(total, rng);
  nlg::Vec acc = nlg::Vec::Zero(base.size());
  std::vector<int> perm(r);
  for (int i = 0; i < r; ++i) perm[i] = i;
  do acc += nlg::permute_registers(base, s.dims(), perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  s.amp = acc / acc.norm();
  return s;
}

}  // namespace gen
