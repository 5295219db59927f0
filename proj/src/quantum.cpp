#include "nlg/quantum.hpp"

#include <algorithm>
#include <numeric>

#include "nlg/error.hpp"

namespace nlg {

namespace {

std::size_t product(const std::vector<int>& dims, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t i = from; i < to; ++i) p *= std::size_t(dims[i]);
  return p;
}

void check_dims(const Vec& psi, const std::vector<int>& dims) {
  require(std::size_t(psi.size()) == product(dims, 0, dims.size()), ErrorKind::DimensionMismatch,
          "state length does not match register dimensions");
}

}  // namespace

Vec apply_on_register(const Vec& psi, const std::vector<int>& dims, int k, const Mat& op) {
  check_dims(psi, dims);
  require(k >= 0 && k < int(dims.size()), ErrorKind::DimensionMismatch, "register index out of range");
  const Eigen::Index d = dims[k];
  require(op.rows() == d && op.cols() == d, ErrorKind::DimensionMismatch, "operator does not match register dimension");
  const Eigen::Index right = Eigen::Index(product(dims, k + 1, dims.size()));
  const Eigen::Index left = Eigen::Index(product(dims, 0, k));
  Vec out(psi.size());
  const Mat opt = op.transpose();
  for (Eigen::Index l = 0; l < left; ++l) {
    Eigen::Map<const Mat> in(psi.data() + l * d * right, right, d);
    Eigen::Map<Mat> dst(out.data() + l * d * right, right, d);
    dst.noalias() = in * opt;
  }
  return out;
}

Vec permute_registers(const Vec& psi, const std::vector<int>& dims, const std::vector<int>& perm) {
  check_dims(psi, dims);
  const std::size_t r = dims.size();
  require(perm.size() == r, ErrorKind::DimensionMismatch, "permutation length differs from register count");
  std::vector<int> out_dims(r);
  for (std::size_t j = 0; j < r; ++j) out_dims[j] = dims[perm[j]];
  // Stride of each input register.
  std::vector<std::size_t> stride(r, 1);
  for (std::size_t i = r; i-- > 1;) stride[i - 1] = stride[i] * std::size_t(dims[i]);
  Vec out(psi.size());
  std::vector<int> digit(r, 0);
  for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
    std::size_t src = 0;
    for (std::size_t j = 0; j < r; ++j) src += stride[perm[j]] * std::size_t(digit[j]);
    out[idx] = psi[Eigen::Index(src)];
    for (std::size_t j = r; j-- > 0;) {
      if (++digit[j] < out_dims[j]) break;
      digit[j] = 0;
    }
  }
  return out;
}

Vec swap_registers(const Vec& psi, const std::vector<int>& dims, int i, int j) {
  std::vector<int> perm(dims.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[i], perm[j]);
  return permute_registers(psi, dims, perm);
}

double min_eigenvalue(const Mat& h) {
  if (h.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Mat& h, double floor) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-9 && min_eigenvalue(h) >= -floor;
}

Mat psd_sqrt(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

std::size_t QuantumStrategy::total_dim() const { return product(dims, 0, dims.size()); }

void QuantumStrategy::validate(double tol) const {
  require(povms.size() == dims.size(), ErrorKind::InvariantViolation, "POVM list does not match player count");
  require(std::size_t(state.size()) == total_dim(), ErrorKind::InvariantViolation, "state length mismatch");
  const double nrm = state.norm();
  require(std::abs(nrm - 1) <= tol, ErrorKind::InvariantViolation, "state norm " + std::to_string(nrm) + " is not 1");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const Mat id = Mat::Identity(dims[i], dims[i]);
    for (std::size_t q = 0; q < povms[i].size(); ++q) {
      if (povms[i][q].empty()) continue;
      Mat sum = Mat::Zero(dims[i], dims[i]);
      for (std::size_t a = 0; a < povms[i][q].size(); ++a) {
        const Mat& e = povms[i][q][a];
        const std::string where =
            "player " + std::to_string(i) + " question " + std::to_string(q) + " answer " + std::to_string(a);
        require(e.rows() == dims[i] && e.cols() == dims[i], ErrorKind::InvariantViolation, "bad POVM shape at " + where);
        const double ev = min_eigenvalue(e);
        require((e - e.adjoint()).cwiseAbs().maxCoeff() <= 1e-9 && ev >= -kPsdFloor, ErrorKind::InvariantViolation,
                "POVM element not PSD at " + where + " (min eigenvalue " + std::to_string(ev) + ")");
        sum += e;
      }
      require((sum - id).cwiseAbs().maxCoeff() <= tol, ErrorKind::InvariantViolation,
              "POVM of player " + std::to_string(i) + " question " + std::to_string(q) + " is not complete");
    }
  }
}

double evaluate_quantum(const ExplicitGame& g, const QuantumStrategy& s, std::size_t dim_cap) {
  const int r = g.players();
  require(int(s.dims.size()) == r, ErrorKind::InvalidInput, "strategy has wrong number of players");
  require(s.total_dim() <= dim_cap, ErrorKind::TooLarge,
          "total dimension " + std::to_string(s.total_dim()) + " exceeds cap " + std::to_string(dim_cap));
  s.validate();
  const int na = g.num_answers();
  for (int i = 0; i < r; ++i)
    for (int q : g.support(i)) {
      require(q < int(s.povms[i].size()) && int(s.povms[i][q].size()) == na, ErrorKind::InvalidInput,
              "player " + std::to_string(i) + " lacks a POVM with " + std::to_string(na) + " outcomes for question '" +
                  g.question_labels()[q] + "'");
    }
  cplx total = 0;
  std::vector<int> a(r);
  std::vector<Vec> stack(r + 1);
  for (const auto& [q, w] : g.distribution()) {
    stack[0] = s.state;
    cplx sum = 0;
    // Depth-first over answer tuples, applying one register at a time.
    auto dfs = [&](auto&& self, int k) -> void {
      if (k == r) {
        if (g.predicate(q, a)) sum += s.state.dot(stack[r]);
        return;
      }
      for (int x = 0; x < na; ++x) {
        a[k] = x;
        stack[k + 1] = apply_on_register(stack[k], s.dims, k, s.povms[k][q[k]][x]);
        self(self, k + 1);
      }
    };
    dfs(dfs, 0);
    total += w.to_double() * sum;
  }
  require(std::abs(total.imag()) < kImagResidue, ErrorKind::InvariantViolation,
          "acceptance probability has imaginary residue " + std::to_string(total.imag()));
  return total.real();
}

QuantumStrategy embed_deterministic(const ExplicitGame& g, const DeterministicStrategy& s) {
  const int r = g.players(), nq = g.num_questions(), na = g.num_answers();
  require(int(s.table.size()) == r, ErrorKind::InvalidInput, "strategy has wrong number of players");
  QuantumStrategy qs;
  qs.dims.assign(r, 2);
  qs.state = Vec::Zero(Eigen::Index(1) << r);
  qs.state[0] = 1;
  qs.povms.assign(r, std::vector<std::vector<Mat>>(nq));
  for (int i = 0; i < r; ++i)
    for (int q = 0; q < nq; ++q) {
      const int ans = q < int(s.table[i].size()) ? s.table[i][q] : -1;
      if (ans < 0) continue;
      auto& povm = qs.povms[i][q];
      povm.assign(na, Mat::Zero(2, 2));
      povm[ans] = Mat::Identity(2, 2);
    }
  return qs;
}

QuantumStrategy symmetrize(const ExplicitGame& g, const QuantumStrategy& s, std::size_t dim_cap) {
  require(g.check_symmetry(), ErrorKind::InvalidInput, "symmetrization needs a symmetric game");
  s.validate();
  const int r = g.players(), nq = g.num_questions(), na = g.num_answers();
  require(int(s.dims.size()) == r, ErrorKind::InvalidInput, "strategy has wrong number of players");
  const int D = *std::max_element(s.dims.begin(), s.dims.end());
  const int reg = r * D;
  std::size_t total = 1;
  for (int i = 0; i < r; ++i) {
    total *= std::size_t(reg);
    require(total <= dim_cap, ErrorKind::TooLarge, "symmetrized dimension exceeds cap");
  }

  // Pad every register to dimension D; padding is answered with outcome 0.
  const std::vector<int> padded_dims(r, D);
  Vec padded = Vec::Zero(Eigen::Index(product(padded_dims, 0, r)));
  {
    std::vector<int> digit(r, 0);
    for (Eigen::Index idx = 0; idx < s.state.size(); ++idx) {
      std::size_t dst = 0;
      for (int j = 0; j < r; ++j) dst = dst * std::size_t(D) + std::size_t(digit[j]);
      padded[Eigen::Index(dst)] = s.state[idx];
      for (int j = r; j-- > 0;) {
        if (++digit[j] < s.dims[j]) break;
        digit[j] = 0;
      }
    }
  }
  auto padded_povm = [&](int player, int q, int a) -> Mat {
    Mat out = Mat::Zero(D, D);
    const int d = s.dims[player];
    const bool have = q < int(s.povms[player].size()) && !s.povms[player][q].empty();
    if (have) {
      require(int(s.povms[player][q].size()) == na, ErrorKind::InvalidInput, "POVM outcome count differs from |A|");
      out.topLeftCorner(d, d) = s.povms[player][q][a];
      if (a == 0 && D > d) out.bottomRightCorner(D - d, D - d).setIdentity();
    } else if (a == 0) {
      out.setIdentity();
    }
    return out;
  };

  QuantumStrategy out;
  out.dims.assign(r, reg);
  out.state = Vec::Zero(Eigen::Index(total));
  std::vector<int> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  double count = 0;
  do {
    const Vec branch = permute_registers(padded, padded_dims, perm);
    std::vector<int> digit(r, 0);
    for (Eigen::Index idx = 0; idx < branch.size(); ++idx) {
      std::size_t dst = 0;
      for (int j = 0; j < r; ++j) dst = dst * std::size_t(reg) + std::size_t(perm[j] * D + digit[j]);
      out.state[Eigen::Index(dst)] += branch[idx];
      for (int j = r; j-- > 0;) {
        if (++digit[j] < D) break;
        digit[j] = 0;
      }
    }
    count += 1;
  } while (std::next_permutation(perm.begin(), perm.end()));
  out.state /= std::sqrt(count);

  std::vector<std::vector<Mat>> shared(nq, std::vector<Mat>(na, Mat::Zero(reg, reg)));
  for (int q = 0; q < nq; ++q)
    for (int a = 0; a < na; ++a)
      for (int l = 0; l < r; ++l) shared[q][a].block(l * D, l * D, D, D) = padded_povm(l, q, a);
  out.povms.assign(r, shared);
  return out;
}

double swap_invariance_residual(const Vec& psi, const std::vector<int>& dims) {
  double worst = 0;
  for (std::size_t i = 0; i < dims.size(); ++i)
    for (std::size_t j = i + 1; j < dims.size(); ++j) {
      if (dims[i] != dims[j]) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, (swap_registers(psi, dims, int(i), int(j)) - psi).norm());
    }
  return worst;
}

}  // namespace nlg
