#include <algorithm>
#include <cmath>

#include "nlg/optim.hpp"

namespace nlg {

XorSdpResult xor_bias_sdp_2player(const ExplicitGame& g, const SdpOptions& opts) {
  require(g.players() == 2, ErrorKind::InvalidInput, "XOR bias SDP needs a two-player game");
  require(g.is_xor(), ErrorKind::InvalidInput, "game is not flagged as XOR");
  require(g.num_answers() == 2, ErrorKind::InvalidInput, "XOR games have binary answers");
  const int nq = g.num_questions();
  Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(nq, nq);
  for (const auto& [q, w] : g.distribution()) {
    const int a00[2] = {0, 0}, a01[2] = {0, 1}, a10[2] = {1, 0}, a11[2] = {1, 1};
    const bool even = g.predicate(q, a00);
    require(g.predicate(q, a11) == even && g.predicate(q, a01) == !even && g.predicate(q, a10) == !even,
            ErrorKind::InvalidInput, "predicate is not of XOR form");
    coeff(q[0], q[1]) += (even ? 1.0 : -1.0) * w.to_double();
  }
  SdpProblem p;
  const int blk = p.add_block(2 * nq);
  Mat c = Mat::Zero(2 * nq, 2 * nq);
  c.topRightCorner(nq, nq) = coeff.cast<cplx>() / 2;
  c.bottomLeftCorner(nq, nq) = coeff.transpose().cast<cplx>() / 2;
  p.objective[blk] = c;
  for (int i = 0; i < 2 * nq; ++i) {
    SdpConstraint con;
    con.lhs.assign(1, Mat::Zero(2 * nq, 2 * nq));
    con.lhs[0](i, i) = 1;
    con.rhs = 1;
    p.constraints.push_back(std::move(con));
  }
  XorSdpResult out;
  out.solution = solve_sdp(p, opts);
  out.bias = out.solution.primal_value;
  out.gram = out.solution.primal[0].real();
  return out;
}

namespace {

// sum_q pi(q) sum_{a accepted} (x)_i E_i (applied to v).
Vec game_operator_apply(const ExplicitGame& g, const QuantumStrategy& s, const Vec& v) {
  const int r = g.players(), na = g.num_answers();
  Vec total = Vec::Zero(v.size());
  std::vector<int> a(r);
  std::vector<Vec> stack(r + 1);
  stack[0] = v;
  for (const auto& [q, w] : g.distribution()) {
    const double wd = w.to_double();
    auto dfs = [&](auto&& self, int k) -> void {
      if (k == r) {
        if (g.predicate(q, a)) total += wd * stack[r];
        return;
      }
      for (int x = 0; x < na; ++x) {
        a[k] = x;
        stack[k + 1] = apply_on_register(stack[k], s.dims, k, s.povms[k][q[k]][x]);
        self(self, k + 1);
      }
    };
    dfs(dfs, 0);
  }
  return total;
}

// W[q][a] with value = sum_{q, a} Re Tr(E_{i,q}^a W[q][a]).
std::vector<std::vector<Mat>> player_operators(const ExplicitGame& g, const QuantumStrategy& s, int player) {
  const int r = g.players(), na = g.num_answers(), nq = g.num_questions();
  const int d = s.dims[player];
  std::vector<std::vector<Vec>> acc(nq, std::vector<Vec>(na, Vec::Zero(s.state.size())));
  std::vector<int> a(r);
  std::vector<Vec> stack(r + 1);
  stack[0] = s.state;
  for (const auto& [q, w] : g.distribution()) {
    const double wd = w.to_double();
    auto dfs = [&](auto&& self, int k) -> void {
      if (k == r) {
        for (int x = 0; x < na; ++x) {
          a[player] = x;
          if (g.predicate(q, a)) acc[q[player]][x] += wd * stack[r];
        }
        return;
      }
      if (k == player) {
        stack[k + 1] = stack[k];
        self(self, k + 1);
        return;
      }
      for (int x = 0; x < na; ++x) {
        a[k] = x;
        stack[k + 1] = apply_on_register(stack[k], s.dims, k, s.povms[k][q[k]][x]);
        self(self, k + 1);
      }
    };
    dfs(dfs, 0);
  }
  // Move the player's register to the front and contract the rest.
  std::vector<int> perm(r);
  for (int i = 0; i < r; ++i) perm[i] = i;
  std::swap(perm[0], perm[player]);
  const Vec psi = permute_registers(s.state, s.dims, perm);
  const Eigen::Index rest = psi.size() / d;
  Eigen::Map<const Mat> pm(psi.data(), rest, d);
  std::vector<std::vector<Mat>> out(nq, std::vector<Mat>(na));
  for (int q = 0; q < nq; ++q)
    for (int x = 0; x < na; ++x) {
      const Vec phi = permute_registers(acc[q][x], s.dims, perm);
      Eigen::Map<const Mat> fm(phi.data(), rest, d);
      const Mat k = fm.transpose() * pm.conjugate();
      out[q][x] = (k + k.adjoint()) / 2;
    }
  return out;
}

// Clip to PSD and renormalize so the elements sum to Id exactly.
std::vector<Mat> repair_povm(std::vector<Mat> e) {
  const Eigen::Index d = e[0].rows();
  Mat sum = Mat::Zero(d, d);
  for (auto& x : e) {
    x = (x + x.adjoint()) / 2;
    Eigen::SelfAdjointEigenSolver<Mat> es(x);
    x = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    sum += x;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(sum);
  const Mat inv = es.eigenvectors() * es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() *
                  es.eigenvectors().adjoint();
  for (auto& x : e) {
    x = inv * x * inv;
    x = (x + x.adjoint()) / 2;
  }
  return e;
}

std::vector<Mat> best_povm(const std::vector<Mat>& w) {
  const int na = int(w.size());
  const int d = int(w[0].rows());
  SdpProblem p;
  p.hermitian = true;
  std::vector<std::pair<int, double>> terms;
  for (int x = 0; x < na; ++x) {
    const int blk = p.add_block(d);
    p.objective[blk] = w[x];
    terms.emplace_back(blk, 1.0);
  }
  add_matrix_equality(p, terms, Mat::Identity(d, d));
  // Scale keeps the interior-point start well conditioned for tiny weights.
  double scale = 0;
  for (const auto& x : w) scale = std::max(scale, x.cwiseAbs().maxCoeff());
  if (scale > 0)
    for (auto& o : p.objective) o /= scale;
  try {
    const SdpSolution s = solve_sdp(p, {1e-10, 500});
    return repair_povm(s.primal);
  } catch (const SdpUnsolved& e) {
    return repair_povm(e.best().primal);
  }
}

QuantumStrategy random_strategy(const ExplicitGame& g, const std::vector<int>& dims, Rng& rng) {
  QuantumStrategy s;
  s.dims = dims;
  const int r = g.players(), nq = g.num_questions(), na = g.num_answers();
  s.state = Vec(Eigen::Index(s.total_dim()));
  for (Eigen::Index i = 0; i < s.state.size(); ++i) s.state[i] = cplx(rng.normal(), rng.normal());
  s.state /= s.state.norm();
  s.povms.assign(r, std::vector<std::vector<Mat>>(nq));
  for (int i = 0; i < r; ++i)
    for (int q = 0; q < nq; ++q) {
      const int d = dims[i];
      Mat gm(d, d);
      for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) gm(x, y) = cplx(rng.normal(), rng.normal());
      const Mat u = Eigen::HouseholderQR<Mat>(gm).householderQ();
      std::vector<Mat> e(na, Mat::Zero(d, d));
      for (int k = 0; k < d; ++k) e[rng.below(std::uint64_t(na))] += u.col(k) * u.col(k).adjoint();
      s.povms[i][q] = e;
    }
  return s;
}

}  // namespace

SeesawResult seesaw_lower_bound(const ExplicitGame& g, const std::vector<int>& dims, int restarts, int iters,
                                std::uint64_t seed, const std::optional<QuantumStrategy>& init) {
  const int r = g.players();
  require(int(dims.size()) == r, ErrorKind::InvalidInput, "one dimension per player");
  require(restarts >= 1 && iters >= 1, ErrorKind::InvalidInput, "need at least one restart and one sweep");
  std::size_t total = 1;
  for (int d : dims) {
    require(d >= 1, ErrorKind::InvalidInput, "dimensions must be positive");
    total *= std::size_t(d);
    require(total <= (1u << 12), ErrorKind::TooLarge, "total dimension exceeds the evaluation cap");
  }
  SeesawResult out;
  out.value = -1;
  for (int rs = 0; rs < restarts; ++rs) {
    Rng rng = Rng::stream(seed, "seesaw", std::uint64_t(rs));
    QuantumStrategy s = (rs == 0 && init) ? *init : random_strategy(g, dims, rng);
    if (rs == 0 && init) {
      // Questions the initial strategy leaves open get a trivial POVM.
      s.povms.resize(r);
      for (int i = 0; i < r; ++i) {
        s.povms[i].resize(g.num_questions());
        for (auto& povm : s.povms[i])
          if (povm.empty()) {
            povm.assign(g.num_answers(), Mat::Zero(s.dims[i], s.dims[i]));
            povm[0] = Mat::Identity(s.dims[i], s.dims[i]);
          }
      }
    }
    double value = evaluate_quantum(g, s);
    std::vector<double> sweeps;
    for (int it = 0; it < iters; ++it) {
      const double before = value;
      for (int i = 0; i < r; ++i) {
        const auto w = player_operators(g, s, i);
        QuantumStrategy trial = s;
        for (int q : g.support(i)) trial.povms[i][q] = best_povm(w[q]);
        const double v = evaluate_quantum(g, trial);
        if (v >= value) {
          s = std::move(trial);
          value = v;
        }
      }
      const Eigen::Index n = s.state.size();
      Mat op(n, n);
      for (Eigen::Index c = 0; c < n; ++c) op.col(c) = game_operator_apply(g, s, Vec::Unit(n, c));
      op = (op + op.adjoint()) / 2;
      Eigen::SelfAdjointEigenSolver<Mat> es(op);
      QuantumStrategy trial = s;
      trial.state = es.eigenvectors().col(n - 1);
      const double v = evaluate_quantum(g, trial);
      if (v >= value) {
        s = std::move(trial);
        value = v;
      }
      sweeps.push_back(value);
      if (value - before < 1e-13 && it > 0) break;
    }
    out.sweeps.push_back(sweeps);
    if (value > out.value) {
      out.value = value;
      out.strategy = s;
      out.best_restart = rs;
    }
  }
  return out;
}

}  // namespace nlg
