#include "nlg/quantumlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nlg/error.hpp"

namespace nlg {

namespace {

double real_checked(cplx z, const char* what) {
  require(std::abs(z.imag()) < kImagResidue, ErrorKind::InvariantViolation,
          std::string(what) + " has imaginary residue " + std::to_string(z.imag()));
  return z.real();
}

std::vector<double> uniform_if_empty(const std::vector<double>& w, std::size_t n) {
  if (w.empty()) return std::vector<double>(n, 1.0 / double(n));
  require(w.size() == n, ErrorKind::DimensionMismatch, "point weights do not match point count");
  return w;
}

void check_operator(const Mat& a, const MultiRegisterState& s) {
  require(a.rows() == s.dim && a.cols() == s.dim, ErrorKind::DimensionMismatch,
          "operator is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ", register dimension is " +
              std::to_string(s.dim));
}

}  // namespace

void MultiRegisterState::validate(double tol) const {
  require(registers >= 1 && dim >= 1, ErrorKind::InvalidInput, "bad register layout");
  std::size_t total = 1;
  for (int i = 0; i < registers; ++i) total *= std::size_t(dim);
  require(std::size_t(amp.size()) == total, ErrorKind::DimensionMismatch, "state length mismatch");
  require(std::abs(amp.norm() - 1) <= tol, ErrorKind::InvariantViolation, "state is not normalized");
}

MultiRegisterState ghz_state(int registers, int dim) {
  MultiRegisterState s{registers, dim, Vec::Zero(Eigen::Index(std::pow(dim, registers)))};
  Eigen::Index step = 0;
  for (int i = 0; i < registers; ++i) step = step * dim + 1;
  for (int i = 0; i < dim; ++i) s.amp[i * step] = 1.0 / std::sqrt(double(dim));
  return s;
}

MultiRegisterState schmidt_state(const Eigen::VectorXd& lambda, int registers) {
  require(lambda.size() >= 1 && lambda.minCoeff() >= 0 && lambda.sum() > 0, ErrorKind::InvalidInput,
          "Schmidt coefficients must be nonnegative and not all zero");
  const int d = int(lambda.size());
  MultiRegisterState s{registers, d, Vec::Zero(Eigen::Index(std::pow(d, registers)))};
  Eigen::Index step = 0;
  for (int i = 0; i < registers; ++i) step = step * d + 1;
  const double total = lambda.sum();
  for (int i = 0; i < d; ++i) s.amp[i * step] = std::sqrt(lambda[i] / total);
  return s;
}

Mat reduced_density(const MultiRegisterState& s, int reg) {
  s.validate();
  // Move `reg` to the front, then rho = Psi_mat Psi_mat^dagger.
  std::vector<int> perm(s.registers);
  for (int i = 0; i < s.registers; ++i) perm[i] = i;
  std::swap(perm[0], perm[reg]);
  const Vec moved = permute_registers(s.amp, s.dims(), perm);
  const Eigen::Index rest = moved.size() / s.dim;
  Eigen::Map<const Mat> m(moved.data(), rest, s.dim);  // column i = amplitudes with first digit i
  return (m.adjoint() * m).transpose();
}

Mat SubMeasurement::total() const {
  require(!elems.empty(), ErrorKind::InvalidInput, "empty sub-measurement");
  Mat t = Mat::Zero(elems[0].rows(), elems[0].cols());
  for (const auto& e : elems) t += e;
  return t;
}

void SubMeasurement::validate(double tol) const {
  const Mat t = total();
  for (std::size_t i = 0; i < elems.size(); ++i) {
    const double ev = min_eigenvalue(elems[i]);
    require(ev >= -kPsdFloor, ErrorKind::InvariantViolation,
            "element " + std::to_string(i) + " has eigenvalue " + std::to_string(ev));
    if (projective)
      require((elems[i] * elems[i] - elems[i]).norm() <= 1e-8, ErrorKind::InvariantViolation,
              "element " + std::to_string(i) + " is not a projector");
  }
  const Mat gap = Mat::Identity(t.rows(), t.cols()) - t;
  const double ev = min_eigenvalue(gap);
  require(ev >= -tol, ErrorKind::InvariantViolation, "sum exceeds identity by " + std::to_string(-ev));
}

cplx pairwise_form(const Mat& a, const Mat& b, const MultiRegisterState& s, int ia, int ib) {
  require(s.registers >= 2 && ia != ib && ia >= 0 && ib >= 0 && ia < s.registers && ib < s.registers,
          ErrorKind::DimensionMismatch, "bilinear form needs two distinct registers");
  check_operator(a, s);
  check_operator(b, s);
  const auto dims = s.dims();
  const Vec v = apply_on_register(apply_on_register(s.amp, dims, ia, a), dims, ib, b);
  return s.amp.dot(v);
}

cplx trace_rho(const Mat& a, const MultiRegisterState& s, int reg) {
  check_operator(a, s);
  return s.amp.dot(apply_on_register(s.amp, s.dims(), reg, a));
}

double state_norm(const Mat& a, const MultiRegisterState& s, bool dagger_first) {
  const Mat sq = dagger_first ? Mat(a.adjoint() * a) : Mat(a * a.adjoint());
  return std::sqrt(std::max(0.0, real_checked(trace_rho(sq, s), "norm")));
}

double self_consistency(const std::vector<std::vector<Mat>>& a, const MultiRegisterState& s,
                        const std::vector<double>& weights) {
  const auto w = uniform_if_empty(weights, a.size());
  cplx total = 0;
  for (std::size_t v = 0; v < a.size(); ++v)
    for (const auto& e : a[v]) total += w[v] * pairwise_form(e, Mat::Identity(s.dim, s.dim) - e, s);
  return real_checked(total, "self-consistency");
}

ConsistencyMetrics consistency_metrics(const std::vector<Mat>& m, const std::vector<std::vector<int>>& values,
                                       const std::vector<std::vector<Mat>>& a, const MultiRegisterState& s,
                                       const std::vector<double>& weights) {
  require(m.size() == values.size(), ErrorKind::DimensionMismatch, "one value table per sub-measurement element");
  const auto w = uniform_if_empty(weights, a.size());
  for (const auto& row : values)
    require(row.size() == a.size(), ErrorKind::DimensionMismatch, "value table does not cover every point");
  cplx delta = 0;
  for (std::size_t v = 0; v < a.size(); ++v)
    for (std::size_t g = 0; g < m.size(); ++g)
      for (std::size_t x = 0; x < a[v].size(); ++x)
        if (int(x) != values[g][v]) delta += w[v] * pairwise_form(m[g], a[v][x], s);
  Mat total = Mat::Zero(s.dim, s.dim);
  for (const auto& e : m) total += e;
  const Mat id = Mat::Identity(s.dim, s.dim);
  ConsistencyMetrics out;
  out.delta = real_checked(delta, "consistency");
  out.gamma = real_checked(pairwise_form(total, id - total, s), "projectivity");
  // Tr_rho(Id - M) rather than 1 - Tr_rho(M): exact zero for complete M.
  out.eta = real_checked(trace_rho(id - total, s), "completeness");
  return out;
}

Closeness closeness_from_consistency(const std::vector<Mat>& a, const std::vector<Mat>& b, const MultiRegisterState& s) {
  require(s.registers >= 3, ErrorKind::InvalidInput, "closeness bound needs at least 3 registers");
  require(a.size() == b.size(), ErrorKind::DimensionMismatch, "measurements have different outcome sets");
  Closeness c;
  cplx overlap = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double n = state_norm(a[i] - b[i], s);
    c.lhs += n * n;
    overlap += pairwise_form(a[i], b[i], s);
  }
  c.delta = std::max(0.0, 1 - real_checked(overlap, "overlap"));
  c.bound = 2 * c.delta + 4 * std::sqrt(c.delta);
  c.rigorous_bound = 2 * c.delta + 4 * std::sqrt(2 * c.delta);
  return c;
}

void RobustTripleSpec::validate() const {
  require(vertices >= 1 && outcomes >= 1, ErrorKind::InvalidInput, "empty vertex or outcome set");
  require(int(a.size()) == vertices, ErrorKind::DimensionMismatch, "one measurement per vertex");
  require(!functions.empty(), ErrorKind::InvalidInput, "function family is empty");
  for (const auto& [u, v] : edges)
    require(u >= 0 && v >= 0 && u < vertices && v < vertices && u != v, ErrorKind::InvalidInput, "bad edge");
  for (const auto& f : functions) {
    require(int(f.size()) == vertices, ErrorKind::DimensionMismatch, "function does not cover every vertex");
    for (int x : f) require(x >= 0 && x < outcomes, ErrorKind::InvalidInput, "function value out of range");
  }
  for (int v = 0; v < vertices; ++v) {
    require(int(a[v].size()) == outcomes, ErrorKind::DimensionMismatch, "measurement outcome count mismatch");
    SubMeasurement sm{a[v], false};
    sm.validate();
    const Mat t = sm.total();
    require((t - Mat::Identity(t.rows(), t.cols())).norm() <= 1e-8, ErrorKind::InvariantViolation,
            "measurement at vertex " + std::to_string(v) + " is not complete");
  }
}

std::vector<std::vector<int>> RobustTripleSpec::neighbors() const {
  std::vector<std::vector<int>> nb(vertices);
  for (const auto& [u, v] : edges) {
    nb[u].push_back(v);
    nb[v].push_back(u);
  }
  for (auto& l : nb) {
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
  }
  return nb;
}

RobustTripleMetrics robust_triple_metrics(const RobustTripleSpec& spec, const MultiRegisterState& s,
                                          const std::vector<Mat>& probe, int mixing_steps) {
  spec.validate();
  require(probe.size() == spec.functions.size(), ErrorKind::DimensionMismatch, "probe needs one element per function");
  const int n = spec.vertices;
  RobustTripleMetrics out;
  out.self_consistency = self_consistency(spec.a, s);

  const std::size_t ng = spec.functions.size();
  for (std::size_t g = 0; g < ng; ++g)
    for (std::size_t h = g + 1; h < ng; ++h) {
      int agree = 0;
      for (int v = 0; v < n; ++v) agree += spec.functions[g][v] == spec.functions[h][v];
      out.max_intersection = std::max(out.max_intersection, double(agree) / n);
    }

  const auto nb = spec.neighbors();
  cplx stab = 0;
  for (int v = 0; v < n; ++v) {
    if (nb[v].empty()) continue;
    for (int u : nb[v])
      for (std::size_t g = 0; g < ng; ++g) {
        const Mat diff = spec.a[v][spec.functions[g][v]] - spec.a[u][spec.functions[g][u]];
        stab += pairwise_form(probe[g], diff * diff, s) / double(nb[v].size() * n);
      }
  }
  out.stability = real_checked(stab, "stability");

  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n), step = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v)
    for (int u : nb[v]) step(v, u) = 1.0 / double(nb[v].size());
  for (int k = 1; k <= mixing_steps; ++k) {
    p = p * step;
    out.mixing.push_back((p.array() - 1.0 / n).abs().rowwise().sum().mean());
  }
  return out;
}

CannedStrategy chsh_canned() {
  CannedStrategy c{chsh_game(), {}};
  auto& s = c.strategy;
  s.dims = {2, 2};
  s.state = Vec::Zero(4);
  s.state[0] = s.state[3] = 1 / std::numbers::sqrt2;
  // Projectors onto the +1 / -1 eigenspaces of cos(2t) Z + sin(2t) X; answer 0 is +1.
  auto povm = [](double t) {
    Mat obs(2, 2);
    obs << std::cos(2 * t), std::sin(2 * t), std::sin(2 * t), -std::cos(2 * t);
    const Mat id = Mat::Identity(2, 2);
    return std::vector<Mat>{(id + obs) / 2, (id - obs) / 2};
  };
  const double pi = std::numbers::pi;
  s.povms = {{povm(0), povm(pi / 4)}, {povm(pi / 8), povm(-pi / 8)}};
  return c;
}

}  // namespace nlg
