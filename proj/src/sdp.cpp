#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "nlg/optim.hpp"

namespace nlg {

namespace {

using RMat = Eigen::MatrixXd;
using Blocks = std::vector<RMat>;

constexpr int kMaxDim = 200;

// Real standard form: max <C, X> s.t. <A_i, X> = b_i, X >= 0 (block diagonal).
struct RealSdp {
  std::vector<int> n;
  Blocks c;
  std::vector<std::vector<std::pair<int, RMat>>> a;
  Eigen::VectorXd b;
};

struct RealState {
  Blocks x, z;
  Eigen::VectorXd y;
};

RMat embed(const Mat& h) {
  const Eigen::Index n = h.rows();
  RMat out(2 * n, 2 * n);
  out << h.real(), -h.imag(), h.imag(), h.real();
  return out;
}

Mat unembed(const RMat& x) {
  const Eigen::Index n = x.rows() / 2;
  Mat out(n, n);
  out.real() = (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n)) / 2;
  out.imag() = (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n)) / 2;
  return out;
}

double inner(const Blocks& p, const Blocks& q) {
  double s = 0;
  for (std::size_t k = 0; k < p.size(); ++k) s += (p[k].array() * q[k].array()).sum();
  return s;
}

double fro(const Blocks& p) { return std::sqrt(inner(p, p)); }

RMat sym(const RMat& m) { return (m + m.transpose()) / 2; }

Eigen::VectorXd apply_a(const RealSdp& p, const Blocks& x) {
  Eigen::VectorXd out(p.a.size());
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    double s = 0;
    for (const auto& [k, m] : p.a[i]) s += (m.array() * x[k].array()).sum();
    out[i] = s;
  }
  return out;
}

Blocks apply_at(const RealSdp& p, const Eigen::VectorXd& y) {
  Blocks out;
  for (int n : p.n) out.push_back(RMat::Zero(n, n));
  for (std::size_t i = 0; i < p.a.size(); ++i)
    for (const auto& [k, m] : p.a[i]) out[k] += y[i] * m;
  return out;
}

// Largest step a with X + a dX >= 0 (infinity when unrestricted).
double max_step(const Blocks& x, const Blocks& dx) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<RMat> llt(x[k]);
    if (llt.info() != Eigen::Success) return 0;
    const RMat l = llt.matrixL();
    const RMat linv = l.triangularView<Eigen::Lower>().solve(RMat::Identity(l.rows(), l.cols()));
    const RMat m = sym(linv * dx[k] * linv.transpose());
    const double lo = Eigen::SelfAdjointEigenSolver<RMat>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (lo < 0) best = std::min(best, -1.0 / lo);
  }
  return best;
}

struct Outcome {
  RealState state;
  std::vector<SdpIteration> log;
  bool converged = false;
  std::string reason;
};

Outcome solve_real(const RealSdp& p, const SdpOptions& opts) {
  const std::size_t m = p.a.size();
  const int nb = int(p.n.size());
  double ntot = 0;
  for (int n : p.n) ntot += n;

  double scale = 1;
  for (const auto& c : p.c) scale = std::max(scale, c.norm());
  if (m) scale = std::max(scale, p.b.cwiseAbs().maxCoeff());
  const double start = 10 * std::max(1.0, std::sqrt(scale));

  RealState st;
  for (int n : p.n) {
    st.x.push_back(start * RMat::Identity(n, n));
    st.z.push_back(start * RMat::Identity(n, n));
  }
  st.y = Eigen::VectorXd::Zero(Eigen::Index(m));

  const double bnorm = 1 + (m ? p.b.norm() : 0.0);
  const double cnorm = 1 + fro(p.c);

  Outcome out;
  double best_merit = std::numeric_limits<double>::infinity();
  RealState best = st;
  int stall = 0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd rp = p.b - apply_a(p, st.x);
    Blocks rd = apply_at(p, st.y);
    for (int k = 0; k < nb; ++k) rd[k] -= st.z[k] + p.c[k];

    SdpIteration rec;
    rec.iteration = it;
    rec.primal = inner(p.c, st.x);
    rec.dual = m ? p.b.dot(st.y) : 0.0;
    rec.complementarity = inner(st.x, st.z);
    rec.primal_residual = (m ? rp.norm() : 0.0) / bnorm;
    rec.dual_residual = fro(rd) / cnorm;

    const double merit = std::max({rec.primal_residual, rec.dual_residual, std::abs(rec.primal - rec.dual),
                                   std::abs(rec.complementarity)});
    if (merit < best_merit * 0.999) {
      best_merit = merit;
      best = st;
      stall = 0;
    } else if (++stall > 60) {
      out.log.push_back(rec);
      out.reason = "no progress";
      break;
    }
    if (rec.primal_residual <= opts.tol && rec.dual_residual <= opts.tol && std::abs(rec.primal - rec.dual) <= opts.tol &&
        rec.complementarity <= opts.tol) {
      out.log.push_back(rec);
      out.converged = true;
      out.state = st;
      return out;
    }
    double size = fro(st.x) + fro(st.z) + st.y.norm();
    if (!std::isfinite(size) || size > 1e13) {
      out.log.push_back(rec);
      out.reason = "iterates diverge (infeasible or unbounded)";
      break;
    }

    const double mu = rec.complementarity / ntot;
    Blocks zinv(nb);
    bool ok = true;
    for (int k = 0; k < nb; ++k) {
      Eigen::LLT<RMat> llt(st.z[k]);
      if (llt.info() != Eigen::Success) ok = false;
      zinv[k] = sym(llt.solve(RMat::Identity(p.n[k], p.n[k])));
    }
    if (!ok) {
      out.log.push_back(rec);
      out.reason = "dual slack lost definiteness";
      break;
    }

    // Schur complement M_ij = Tr(A_i X A_j Z^-1).
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));
    {
      std::vector<std::vector<int>> by_block(nb);
      for (std::size_t i = 0; i < m; ++i)
        for (const auto& part : p.a[i]) by_block[part.first].push_back(int(i));
      for (std::size_t j = 0; j < m; ++j)
        for (const auto& [k, aj] : p.a[j]) {
          const RMat g = st.x[k] * aj * zinv[k];
          for (int i : by_block[k])
            for (const auto& [ki, ai] : p.a[i])
              if (ki == k) schur(Eigen::Index(i), Eigen::Index(j)) += (ai.array() * g.array()).sum();
        }
      schur = (schur + schur.transpose()) / 2;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
    const bool use_ldlt = ldlt.info() == Eigen::Success && ldlt.isPositive();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    if (!use_ldlt) cod.compute(schur);
    auto solve_schur = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
      return use_ldlt ? Eigen::VectorXd(ldlt.solve(r)) : Eigen::VectorXd(cod.solve(r));
    };

    Blocks h(nb);
    for (int k = 0; k < nb; ++k) h[k] = sym(st.x[k] * rd[k] * zinv[k]);

    auto direction = [&](double target, const Blocks* w, Blocks& dx, Eigen::VectorXd& dy, Blocks& dz) {
      Blocks rc(nb), diff(nb);
      for (int k = 0; k < nb; ++k) {
        RMat t = target * RMat::Identity(p.n[k], p.n[k]);
        if (w) t -= (*w)[k];
        rc[k] = sym(t * zinv[k]) - st.x[k];
        diff[k] = rc[k] - h[k];
      }
      dy = m ? solve_schur(apply_a(p, diff) - rp) : Eigen::VectorXd();
      dz = apply_at(p, dy);
      dx.assign(nb, RMat());
      for (int k = 0; k < nb; ++k) {
        dz[k] += rd[k];
        dx[k] = rc[k] - sym(st.x[k] * dz[k] * zinv[k]);
      }
    };

    Blocks dx, dz;
    Eigen::VectorXd dy;
    direction(0.0, nullptr, dx, dy, dz);
    double ap = std::min(1.0, max_step(st.x, dx)), ad = std::min(1.0, max_step(st.z, dz));
    Blocks xa(nb), za(nb);
    for (int k = 0; k < nb; ++k) {
      xa[k] = st.x[k] + ap * dx[k];
      za[k] = st.z[k] + ad * dz[k];
    }
    const double mu_aff = inner(xa, za) / ntot;
    double sigma = mu > 0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;
    Blocks w(nb);
    for (int k = 0; k < nb; ++k) w[k] = dx[k] * dz[k];
    direction(sigma * mu, &w, dx, dy, dz);

    const double tau = 0.95;
    ap = std::min(1.0, tau * max_step(st.x, dx));
    ad = std::min(1.0, tau * max_step(st.z, dz));
    rec.step_primal = ap;
    rec.step_dual = ad;
    out.log.push_back(rec);
    for (int k = 0; k < nb; ++k) {
      st.x[k] = sym(st.x[k] + ap * dx[k]);
      st.z[k] = sym(st.z[k] + ad * dz[k]);
    }
    if (m) st.y += ad * dy;
    if (it + 1 == opts.max_iterations) out.reason = "iteration cap reached";
  }
  out.state = best;
  return out;
}

Mat zero_if_empty(const Mat& m, int n) { return m.size() ? m : Mat::Zero(n, n); }

}  // namespace

int SdpProblem::add_block(int n) {
  require(n >= 1, ErrorKind::InvalidInput, "block size must be positive");
  blocks.push_back(n);
  objective.emplace_back();
  for (auto& c : constraints) c.lhs.resize(blocks.size());
  return int(blocks.size()) - 1;
}

int SdpProblem::total_dim() const {
  int t = 0;
  for (int n : blocks) t += n;
  return t;
}

void SdpProblem::validate() const {
  require(!blocks.empty(), ErrorKind::InvalidInput, "SDP has no variable blocks");
  require(objective.size() == blocks.size(), ErrorKind::DimensionMismatch, "one objective entry per block");
  require(total_dim() <= kMaxDim, ErrorKind::TooLarge,
          "total variable dimension " + std::to_string(total_dim()) + " exceeds " + std::to_string(kMaxDim));
  auto check = [&](const Mat& m, int k, const std::string& what) {
    if (!m.size()) return;
    require(m.rows() == blocks[k] && m.cols() == blocks[k], ErrorKind::DimensionMismatch,
            what + " has wrong shape for block " + std::to_string(k));
    require((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::InvalidInput, what + " is not Hermitian");
    if (!hermitian)
      require(m.imag().cwiseAbs().maxCoeff() == 0, ErrorKind::InvalidInput, what + " is complex in a real problem");
  };
  for (std::size_t k = 0; k < blocks.size(); ++k) check(objective[k], int(k), "objective");
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    require(constraints[i].lhs.size() <= blocks.size(), ErrorKind::DimensionMismatch, "constraint has too many blocks");
    for (std::size_t k = 0; k < constraints[i].lhs.size(); ++k)
      check(constraints[i].lhs[k], int(k), "constraint " + std::to_string(i));
  }
}

std::size_t add_matrix_equality(SdpProblem& p, const std::vector<std::pair<int, double>>& terms, const Mat& rhs) {
  const std::size_t first = p.constraints.size();
  const Eigen::Index n = rhs.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      for (int part = 0; part < (p.hermitian && i != j ? 2 : 1); ++part) {
        Mat h = Mat::Zero(n, n);
        if (i == j) {
          h(i, i) = 1;
        } else if (part == 0) {
          h(i, j) = h(j, i) = 0.5;
        } else {
          h(i, j) = cplx(0, 0.5);
          h(j, i) = cplx(0, -0.5);
        }
        SdpConstraint c;
        c.lhs.resize(p.blocks.size());
        for (const auto& [k, coeff] : terms) {
          require(p.blocks[k] == n, ErrorKind::DimensionMismatch, "matrix equality shape mismatch");
          c.lhs[k] = c.lhs[k].size() ? Mat(c.lhs[k] + coeff * h) : Mat(coeff * h);
        }
        c.rhs = (h * rhs).trace().real();
        p.constraints.push_back(std::move(c));
      }
  return first;
}

Mat dual_matrix(const SdpSolution& s, const SdpProblem& p, std::size_t first, int n) {
  Mat y = Mat::Zero(n, n);
  std::size_t idx = first;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int part = 0; part < (p.hermitian && i != j ? 2 : 1); ++part) {
        const double v = s.y.at(idx++);
        if (i == j) {
          y(i, i) += v;
        } else if (part == 0) {
          y(i, j) += v / 2;
          y(j, i) += v / 2;
        } else {
          y(i, j) += cplx(0, v / 2);
          y(j, i) += cplx(0, -v / 2);
        }
      }
  return y;
}

namespace {

// Real problem plus the slack blocks appended for inequalities.
RealSdp to_real(const SdpProblem& p) {
  RealSdp r;
  const double f = p.hermitian ? 2.0 : 1.0;
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const int n = p.blocks[k];
    r.n.push_back(p.hermitian ? 2 * n : n);
    const Mat c = zero_if_empty(p.objective[k], n);
    r.c.push_back(p.hermitian ? RMat(embed(c) / 2) : RMat(c.real()));
  }
  r.b.resize(Eigen::Index(p.constraints.size()));
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    std::vector<std::pair<int, RMat>> row;
    for (std::size_t k = 0; k < c.lhs.size(); ++k)
      if (c.lhs[k].size()) row.emplace_back(int(k), p.hermitian ? embed(c.lhs[k]) : RMat(c.lhs[k].real()));
    if (c.sense != Sense::Eq) {
      r.n.push_back(1);
      r.c.push_back(RMat::Zero(1, 1));
      row.emplace_back(int(r.n.size()) - 1, RMat::Constant(1, 1, c.sense == Sense::Le ? 1.0 : -1.0));
    }
    r.a.push_back(std::move(row));
    r.b[Eigen::Index(i)] = f * c.rhs;
  }
  return r;
}

SdpSolution to_user(const SdpProblem& p, const Outcome& o) {
  SdpSolution s;
  const double f = p.hermitian ? 2.0 : 1.0;
  s.y.resize(p.constraints.size());
  for (std::size_t i = 0; i < s.y.size(); ++i) s.y[i] = f * o.state.y[Eigen::Index(i)];
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    const int n = p.blocks[k];
    const RMat& xr = o.state.x[k];
    s.primal.push_back(p.hermitian ? unembed(xr) : Mat(xr.cast<cplx>()));
    Mat z = -zero_if_empty(p.objective[k], n);
    for (std::size_t i = 0; i < p.constraints.size(); ++i)
      if (k < p.constraints[i].lhs.size() && p.constraints[i].lhs[k].size()) z += s.y[i] * p.constraints[i].lhs[k];
    s.dual.push_back(z);
    s.primal_value += (zero_if_empty(p.objective[k], n) * s.primal.back()).trace().real();
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    s.dual_value += c.rhs * s.y[i];
    double lhs = 0;
    for (std::size_t k = 0; k < c.lhs.size(); ++k)
      if (c.lhs[k].size()) lhs += (c.lhs[k] * s.primal[k]).trace().real();
    double viol = lhs - c.rhs;
    if (c.sense == Sense::Le) viol = std::max(0.0, viol);
    if (c.sense == Sense::Ge) viol = std::min(0.0, viol);
    s.primal_residual = std::max(s.primal_residual, std::abs(viol));
    if (c.sense == Sense::Le) s.dual_residual = std::max(s.dual_residual, -s.y[i]);
    if (c.sense == Sense::Ge) s.dual_residual = std::max(s.dual_residual, s.y[i]);
  }
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    s.primal_residual = std::max(s.primal_residual, -min_eigenvalue(s.primal[k]));
    s.dual_residual = std::max(s.dual_residual, -min_eigenvalue(s.dual[k]));
  }
  s.gap = std::abs(s.primal_value - s.dual_value);
  s.converged = o.converged;
  s.log = o.log;
  return s;
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& p, const SdpOptions& opts) {
  p.validate();
  require(opts.tol > 0 && opts.max_iterations > 0, ErrorKind::InvalidInput, "bad solver options");
  const Outcome o = solve_real(to_real(p), opts);
  SdpSolution s = to_user(p, o);
  if (!o.converged)
    throw SdpUnsolved("SDP not solved after " + std::to_string(o.log.size()) + " iterations: " + o.reason, std::move(s));
  return s;
}

void write_sdpa(std::ostream& out, const SdpProblem& p) {
  p.validate();
  const RealSdp r = to_real(p);
  out.precision(17);
  out << "* real embedding of a " << (p.hermitian ? "Hermitian" : "real") << " SDP; maximize <F0, X>\n";
  out << r.a.size() << "\n" << r.n.size() << "\n";
  for (std::size_t k = 0; k < r.n.size(); ++k) out << r.n[k] << (k + 1 < r.n.size() ? " " : "\n");
  for (Eigen::Index i = 0; i < r.b.size(); ++i) out << r.b[i] << (i + 1 < r.b.size() ? " " : "\n");
  if (r.b.size() == 0) out << "\n";
  auto dump = [&](std::size_t mat, int block, const RMat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = i; j < m.cols(); ++j)
        if (m(i, j) != 0) out << mat << " " << block + 1 << " " << i + 1 << " " << j + 1 << " " << m(i, j) << "\n";
  };
  for (std::size_t k = 0; k < r.c.size(); ++k) dump(0, int(k), r.c[k]);
  for (std::size_t i = 0; i < r.a.size(); ++i)
    for (const auto& [k, m] : r.a[i]) dump(i + 1, k, m);
}

}  // namespace nlg
