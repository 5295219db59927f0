#include <cmath>

#include "nlg/optim.hpp"

namespace nlg {

namespace {

std::vector<double> point_weights(const std::vector<double>& w, std::size_t n) {
  if (w.empty()) return std::vector<double>(n, 1.0 / double(n));
  require(w.size() == n, ErrorKind::DimensionMismatch, "point weights do not match point count");
  return w;
}

void check_values(const std::vector<std::vector<Mat>>& a, const std::vector<std::vector<int>>& values) {
  require(!a.empty(), ErrorKind::InvalidInput, "no points");
  for (const auto& row : values) {
    require(row.size() == a.size(), ErrorKind::DimensionMismatch, "value table does not cover every point");
    for (std::size_t v = 0; v < row.size(); ++v)
      require(row[v] >= 0 && row[v] < int(a[v].size()), ErrorKind::InvalidInput, "function value out of range");
  }
}

}  // namespace

ConsolidationResult consolidation_sdp(const Mat& rho, const std::vector<Mat>& abar, const SdpOptions& opts) {
  const Eigen::Index n = rho.rows();
  require(rho.cols() == n && n >= 1, ErrorKind::DimensionMismatch, "rho must be square");
  require(is_psd(rho, 1e-9), ErrorKind::InvalidInput, "rho is not PSD");
  require(std::abs(rho.trace().real() - 1) <= 1e-9, ErrorKind::InvalidInput, "rho does not have unit trace");
  require(!abar.empty(), ErrorKind::InvalidInput, "empty function family");
  const Mat id = Mat::Identity(n, n);
  for (std::size_t g = 0; g < abar.size(); ++g) {
    require(abar[g].rows() == n && abar[g].cols() == n, ErrorKind::DimensionMismatch, "operator shape differs from rho");
    require(is_psd(abar[g], 1e-9) && is_psd(id - abar[g], 1e-9), ErrorKind::InvalidInput,
            "operator " + std::to_string(g) + " is not between 0 and Id");
  }

  // Restrict to the support of rho.
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  const double top = es.eigenvalues().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.eigenvalues()[i] > 1e-12 * top) keep.push_back(i);
  const Eigen::Index k = Eigen::Index(keep.size());
  Mat v(n, k);
  for (Eigen::Index j = 0; j < k; ++j) v.col(j) = es.eigenvectors().col(keep[j]);

  ConsolidationResult out;
  out.sqrt_rho = psd_sqrt(rho);
  std::vector<Mat> b, br;
  bool real = rho.imag().cwiseAbs().maxCoeff() == 0;
  for (const auto& a : abar) {
    b.push_back(out.sqrt_rho * a * out.sqrt_rho);
    b.back() = (b.back() + b.back().adjoint()) / 2;
    br.push_back(v.adjoint() * b.back() * v);
    br.back() = (br.back() + br.back().adjoint()) / 2;
    real = real && br.back().imag().cwiseAbs().maxCoeff() == 0 && v.imag().cwiseAbs().maxCoeff() == 0;
  }

  SdpProblem p;
  p.hermitian = !real;
  const int ng = int(abar.size());
  std::vector<std::pair<int, double>> terms;
  for (int g = 0; g < ng; ++g) {
    const int blk = p.add_block(int(k));
    p.objective[blk] = real ? Mat(br[g].real().cast<cplx>()) : br[g];
    terms.emplace_back(blk, 1.0);
  }
  terms.emplace_back(p.add_block(int(k)), 1.0);
  const std::size_t first = add_matrix_equality(p, terms, Mat::Identity(k, k));
  const SdpSolution sol = solve_sdp(p, opts);
  out.iterations = int(sol.log.size());

  const Mat xr = dual_matrix(sol, p, first, int(k));
  out.x = v * xr * v.adjoint();
  Mat total = Mat::Zero(n, n);
  for (int g = 0; g < ng; ++g) {
    out.t.push_back(v * sol.primal[g] * v.adjoint());
    total += out.t.back();
  }
  out.omega = sol.primal_value;
  out.dual_value = out.x.trace().real();
  out.gap = std::abs(out.omega - out.dual_value);
  out.slack_absorbed = (id - total).norm();
  out.t[0] += id - total;
  Mat after = Mat::Zero(n, n);
  for (const auto& t : out.t) after += t;
  out.normalization_residual = (id - after).norm();

  out.dual_violation = std::max(0.0, -min_eigenvalue(out.x));
  for (int g = 0; g < ng; ++g) {
    const Mat& t = out.t[g];
    const double left = (t * out.x - t * b[g]).norm(), right = (out.x * t - b[g] * t).norm();
    out.slackness.push_back(std::max(left, right));
    out.max_slackness = std::max(out.max_slackness, out.slackness.back());
    out.dual_violation = std::max(out.dual_violation, -min_eigenvalue(out.x - b[g]));
  }
  return out;
}

double consolidation_objective(const Mat& rho, const std::vector<Mat>& abar, const std::vector<Mat>& t) {
  require(abar.size() == t.size(), ErrorKind::DimensionMismatch, "one T per function");
  const Mat sr = psd_sqrt(rho);
  double s = 0;
  for (std::size_t g = 0; g < t.size(); ++g) s += (t[g] * sr * abar[g] * sr).trace().real();
  return s;
}

std::vector<Mat> improved_submeasurement(const std::vector<Mat>& t, const std::vector<std::vector<Mat>>& a,
                                         const std::vector<std::vector<int>>& values,
                                         const std::vector<double>& weights) {
  require(t.size() == values.size(), ErrorKind::DimensionMismatch, "one T per function");
  check_values(a, values);
  const auto w = point_weights(weights, a.size());
  std::vector<Mat> s;
  for (std::size_t g = 0; g < t.size(); ++g) {
    Mat acc = Mat::Zero(t[g].rows(), t[g].cols());
    for (std::size_t v = 0; v < a.size(); ++v) {
      const Mat& p = a[v][values[g][v]];
      require(p.rows() == t[g].rows(), ErrorKind::DimensionMismatch, "measurement shape differs from T");
      acc += w[v] * p * t[g] * p;
    }
    s.push_back((acc + acc.adjoint()) / 2);
  }
  SubMeasurement{s, false}.validate();
  return s;
}

std::vector<Mat> averaged_conjugates(const std::vector<std::vector<Mat>>& a, const std::vector<std::vector<int>>& values,
                                     const std::vector<double>& weights) {
  check_values(a, values);
  const auto w = point_weights(weights, a.size());
  std::vector<Mat> out;
  for (const auto& row : values) {
    Mat acc = Mat::Zero(a[0][0].rows(), a[0][0].cols());
    for (std::size_t v = 0; v < a.size(); ++v) acc += w[v] * a[v][row[v]];
    out.push_back(acc.conjugate());
  }
  return out;
}

ConsolidationAudit audit_consolidation(const MultiRegisterState& s, const std::vector<std::vector<Mat>>& a,
                                       const std::vector<std::vector<int>>& values, const std::vector<double>& weights,
                                       const SdpOptions& opts) {
  require(s.registers == 2, ErrorKind::InvalidInput, "consolidation audit works on two-register states");
  s.validate();
  const Mat rho = reduced_density(s, 0);
  Eigen::Map<const Mat> m_colmajor(s.amp.data(), s.dim, s.dim);
  const Mat m = m_colmajor.transpose();  // m(i, j) = amplitude of |i>|j>
  require((m - psd_sqrt(rho)).norm() <= 1e-8, ErrorKind::InvalidInput,
          "state amplitude matrix must equal rho^{1/2} (rotate the measurements first)");

  ConsolidationAudit out;
  out.sdp = consolidation_sdp(rho, averaged_conjugates(a, values, weights), opts);
  out.s = improved_submeasurement(out.sdp.t, a, values, weights);
  Mat total = Mat::Zero(s.dim, s.dim);
  for (const auto& x : out.s) total += x;
  out.trace_s = (rho * total).trace().real();
  out.self_consistency = std::max(0.0, self_consistency(a, s, weights));
  out.bound = out.sdp.omega - 2 * std::sqrt(2 * out.self_consistency);
  out.margin = out.trace_s - out.bound;
  out.loose_margin = out.trace_s - (out.sdp.omega - 2 * std::sqrt(out.self_consistency));
  out.passed = out.margin >= -1e-9;
  return out;
}

ComplementState complement_state(const MultiRegisterState& s, const Mat& r) {
  s.validate();
  require(r.rows() == s.dim && r.cols() == s.dim, ErrorKind::DimensionMismatch, "operator shape differs from register");
  const Mat id = Mat::Identity(s.dim, s.dim);
  require(is_psd(r, 1e-9) && is_psd(id - r, 1e-9), ErrorKind::InvalidInput, "R must satisfy 0 <= R <= Id");
  const auto dims = s.dims();
  const Mat c = id - r;
  Vec all = s.amp;
  for (int i = 0; i < s.registers; ++i) all = apply_on_register(all, dims, i, c);
  const Vec last = apply_on_register(s.amp, dims, s.registers - 1, c);

  ComplementState out;
  out.z = all.norm();
  require(out.z > 1e-12, ErrorKind::InvalidInput, "(Id - R) annihilates the state");
  out.phi = MultiRegisterState{s.registers, s.dim, all / out.z};
  out.delta = std::max(0.0, pairwise_form(r, c, s).real());
  out.residual = (all - last).squaredNorm();
  out.bound = double(s.registers) * s.registers * out.delta;
  out.z_floor = 1 - pairwise_form(r, id, s).real() - 3 * s.registers * std::sqrt(out.delta);
  return out;
}

}  // namespace nlg
