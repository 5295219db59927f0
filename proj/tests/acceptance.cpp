// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "gen.hpp"
#include "gen_quantum.hpp"
#include "nlg/optim.hpp"
#include "nlg/quantum.hpp"
#include "nlg/quantumlab.hpp"
#include "nlg/reductions.hpp"

using namespace nlg;
namespace fs = std::filesystem;

namespace {

const std::string kData = NLG_TEST_DATA;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// |x - mu| <= 3 sigma for a Bernoulli mean over n rounds; sigma = 0 means exact.
bool within_3sigma(double x, double mu, std::uint64_t n) {
  const double sigma = std::sqrt(mu * (1 - mu) / double(n));
  return std::abs(x - mu) <= 3 * sigma;
}

// Random 3-CNF made satisfiable by x: each clause's first literal agrees with x.
Cnf planted_cnf(const std::vector<bool>& x, int clauses, Rng& rng) {
  Cnf cnf;
  cnf.n = int(x.size());
  for (int k = 0; k < clauses; ++k) {
    std::array<int, 3> c{};
    for (auto& lit : c) lit = int(rng.below(std::uint64_t(cnf.n)) + 1) * (rng.bit() ? 1 : -1);
    c[0] = x[std::size_t(std::abs(c[0]) - 1)] ? std::abs(c[0]) : -std::abs(c[0]);
    cnf.clauses.push_back(c);
  }
  return cnf;
}

// ---------------------------------------------------------------------------

Outcome chsh_classical() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto best = classical_value_bruteforce(chsh_game());
  const double t = seconds_since(t0);
  o.require(best.value == Rational(3, 4), "value " + best.value.str());
  o.require(t < 1.0, "runtime " + fmt("%.3f s", t));
  if (o.pass) o.detail = "value " + best.value.str();
  return o;
}

Outcome chsh_quantum() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = chsh_canned();
  const double v = evaluate_quantum(c.game, c.strategy);
  const double bias = xor_bias_sdp_2player(chsh_game()).bias;
  const double t = seconds_since(t0);
  o.require(std::abs(v - (0.5 + std::sqrt(2.0) / 4)) <= 1e-9, "value " + fmt("%.17g", v));
  o.require(std::abs(bias - std::sqrt(2.0) / 2) <= 1e-6, "sdp bias " + fmt("%.17g", bias));
  o.require(t < 10.0, "runtime " + fmt("%.3f s", t));
  if (o.pass) o.detail = "value " + fmt("%.12f", v) + ", sdp bias " + fmt("%.9f", bias);
  return o;
}

Outcome completeness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = Rng::stream(3, "acceptance.completeness");

  const LowDegreeParams ld{make_field(5), 2, 2, 2};
  const auto g_ld = gen::poly(ld.field, ld.m, ld.d, 6, rng);
  o.require(evaluate_exact(LowDegreeTest(ld), honest_ld_strategy(ld, g_ld), 100'000'000) == Rational(1),
            "(a) plane-vs-point below 1");

  const LowDegreeParams tl{make_field(5), 1, 2, 2};
  const auto g_tl = gen::poly(tl.field, tl.m, tl.d, 4, rng);
  o.require(evaluate_exact(TwoLevelTest(tl), honest_twolevel_strategy(tl, g_tl), 100'000'000) == Rational(1),
            "(b) two-level below 1");

  std::vector<bool> x(20, false);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.bit();
  const Cnf cnf = planted_cnf(x, 80, rng);
  const SatTest sat(cnf, make_field(choose_field(cnf.n, ReductionConfig{}).q));
  const auto mc_sat = monte_carlo_value(sat, honest_sat_strategy(sat, x), 100'000, 31);
  o.require(mc_sat.accepted == mc_sat.rounds, "(c) 3-SAT rejections " + std::to_string(mc_sat.rounds - mc_sat.accepted));

  const LinearityTest lin(4);
  o.require(evaluate_exact(lin, linear_strategy({1, 0, 1, 1})) == Rational(1), "(d) linearity below 1");

  QuadeqInstance inst;
  inst.n = 2 * 4 + 2;
  inst.naux = 2;
  std::vector<std::uint8_t> y(std::size_t(inst.n));
  for (auto& b : y) b = rng.bit();
  for (int e = 0; e < 8; ++e) {
    QuadEquation eq;
    for (int t = 0; t < 3; ++t) {
      const int i = int(rng.below(std::uint64_t(inst.n))), j = int(rng.below(std::uint64_t(inst.n)));
      eq.terms.push_back({i, j});
      eq.constant ^= y[i] & y[j];
    }
    inst.equations.push_back(eq);
  }
  const auto mc_q = monte_carlo_value(QuadeqTest(inst), honest_quadeq_strategy(inst, y), 100'000, 32);
  o.require(mc_q.accepted == mc_q.rounds, "(e) QUADEQ rejections " + std::to_string(mc_q.rounds - mc_q.accepted));

  const double t = seconds_since(t0);
  o.require(t < 300.0, "runtime " + fmt("%.1f s", t));
  if (o.pass) o.detail = "(a)-(e) accept with probability 1, q=" + std::to_string(sat.params().field.modulus()) + " for n=20";
  return o;
}

Outcome xor_gadget() {
  Outcome o;
  const Cnf cnf = parse_dimacs("p cnf 4 4\n1 2 -3 0\n-1 3 4 0\n2 -4 3 0\n-2 -3 1 0\n");
  const std::vector<bool> w{true, true, true, false};
  const std::uint64_t n = 100'000;
  std::string parts;
  std::uint64_t seed = 41;
  for (double eps : {0.0, 0.05, 0.2}) {
    ReductionConfig cfg;
    cfg.xor_eps = eps;
    const auto stages = build_pipeline(cnf, "xor", cfg);
    const auto& st = stages.back();
    const auto mc = monte_carlo_value(*st.game, *st.honest(w), n, seed++);
    o.require(within_3sigma(mc.estimate, 1 - eps, n), "eps " + fmt("%g", eps) + " acceptance " + fmt("%.5f", mc.estimate));
    parts += (parts.empty() ? "" : ", ") + fmt("%g", eps) + " -> " + fmt("%.5f", mc.estimate);
  }
  if (o.pass) o.detail = "eps -> acceptance: " + parts;
  return o;
}

Outcome soundness() {
  Outcome o;
  Rng rng = Rng::stream(5, "acceptance.soundness");
  const int n = 8, clauses = 20;
  const std::uint64_t rounds = 100'000;
  std::string parts;
  std::uint64_t seed = 51;
  for (int violated : {2, 10}) {
    std::vector<bool> x(n, false);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.bit();
    Cnf cnf = planted_cnf(x, clauses, rng);
    // Make exactly `violated` clauses false under x.
    for (int k = 0; k < violated; ++k)
      for (auto& lit : cnf.clauses[std::size_t(k)])
        lit = x[std::size_t(std::abs(lit) - 1)] ? -std::abs(lit) : std::abs(lit);
    const double gamma = cnf.violated_fraction(x);
    o.require(std::abs(gamma - double(violated) / clauses) < 1e-15, "construction");
    const SatTest test(cnf, make_field(choose_field(n, ReductionConfig{}).q));
    const auto mc = monte_carlo_value(test, honest_sat_strategy(test, x), rounds, seed++);
    const double rej = 1 - mc.estimate;
    o.require(within_3sigma(rej, gamma / 4, rounds), "gamma " + fmt("%g", gamma) + " rejection " + fmt("%.5f", rej));
    parts += (parts.empty() ? "" : ", ") + fmt("%g", gamma) + " -> " + fmt("%.5f", rej);
  }
  if (o.pass) o.detail = "gamma -> rejection: " + parts;
  return o;
}

Outcome polynomial_core() {
  Outcome o;
  Rng rng = Rng::stream(6, "acceptance.poly");
  const auto f = make_field(101);
  for (int d : {1, 2, 3, 7})
    for (int i = 0; i < 1000; ++i) {
      const auto g = gen::poly(f, 2, d, 6, rng);
      const auto gs = substitute_vars(g, d);
      const Residue x = f.sample(rng), y = f.sample(rng);
      o.require(gs.max_individual_degree() <= 1, "substituted degree");
      o.require(g.evaluate(Point{x, y}) == gs.evaluate(sharp_apply(f, d, x, y)), "g(x) != g'(#x) at d=" + std::to_string(d));
    }

  const auto f13 = make_field(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 1 + int(rng.below(3)), m = 1 + int(rng.below(3));
    std::size_t total = 1;
    for (int i = 0; i < m; ++i) total *= std::size_t(h + 1);
    std::vector<Residue> grid(total);
    for (auto& v : grid) v = f13.sample(rng);
    const auto ext = low_degree_extension(f13, std::span<const Residue>(grid), h, m);
    o.require(ext.max_individual_degree() <= h, "extension degree");
    for (std::size_t idx = 0; idx < total; ++idx) {
      Point p(m);
      std::size_t rest = idx;
      for (int i = 0; i < m; ++i, rest /= std::size_t(h + 1)) p[i] = Residue(rest % std::size_t(h + 1));
      o.require(ext.evaluate(p) == grid[idx], "extension disagrees on the grid");
    }
  }

  int checked = 0;
  for (std::uint64_t q : {5, 7, 11, 13}) {
    const auto fq = make_field(q);
    for (int i = 0; i < 40; ++i) {
      const auto p = gen::poly(fq, 1 + int(rng.below(2)), int(q) - 1, 5, rng);
      if (p.is_zero()) continue;
      ++checked;
      o.require(zero_fraction_exhaustive(p) <= Rational(p.total_degree(), std::int64_t(q)), "Schwartz-Zippel");
    }
  }
  if (o.pass) o.detail = "4000 substitutions, 100 extensions, " + std::to_string(checked) + " zero-fraction checks";
  return o;
}

Outcome quadeq_encoding() {
  Outcome o;
  Rng rng = Rng::stream(7, "acceptance.quadeq");
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 2;  // answers of m bits per player, 2m bits in total
    const std::uint32_t nin = 1u << (2 * m);
    std::vector<std::uint8_t> truth(nin);
    const double density = rng.uniform();
    for (auto& t : truth) t = rng.bernoulli(density);
    const auto enc = predicate_to_quadeq([&](std::uint32_t x) { return truth[x] != 0; }, m);
    const int n = enc.instance.n;
    std::vector<std::uint8_t> sat(nin, 0), x(std::size_t(n), 0);
    for (std::uint64_t a = 0; a < (std::uint64_t(1) << n); ++a) {
      for (int i = 0; i < n; ++i) x[std::size_t(i)] = a >> i & 1;
      if (enc.instance.satisfied(x)) sat[a & (nin - 1)] = 1;
    }
    o.require(sat == truth, "satisfying set differs on trial " + std::to_string(trial));
  }
  if (o.pass) o.detail = "100 predicates match";
  return o;
}

MultiRegisterState canonical_state(int d, Rng& rng) {
  Eigen::MatrixXd g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::MatrixXd rho = g * g.transpose();
  rho /= rho.trace();
  const Mat m = psd_sqrt(rho.cast<cplx>());
  MultiRegisterState s{2, d, Vec(d * d)};
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s.amp[i * d + j] = m(i, j);
  s.amp /= s.amp.norm();
  return s;
}

bool submeasurement(const std::vector<Mat>& s, double tol) {
  const Eigen::Index d = s.front().rows();
  Mat total = Mat::Zero(d, d);
  for (const auto& x : s) {
    if ((x - x.adjoint()).norm() > tol || min_eigenvalue(x) < -tol) return false;
    total += x;
  }
  return min_eigenvalue(Mat::Identity(d, d) - total) >= -tol;
}

Outcome sdp_lab() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng = Rng::stream(8, "acceptance.sdp");
  double gap = 0, slack = 0, margin = 1e9, tight = 1e9;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + int(rng.below(5)), ng = 1 + int(rng.below(4)), points = 2 + int(rng.below(3));
    const int outcomes = 2 + int(rng.below(2));
    const auto s = canonical_state(d, rng);
    std::vector<std::vector<Mat>> a;
    if (trial % 2) {
      for (int v = 0; v < points; ++v) a.push_back(gen::random_projective(d, outcomes, rng));
    } else {
      // Projectors onto groups of eigenvectors of rho: self-consistency 0, so the audit bound is omega itself.
      const Mat amp = Eigen::Map<const Mat>(s.amp.data(), d, d);
      const Eigen::SelfAdjointEigenSolver<Mat> es(amp);
      for (int v = 0; v < points; ++v) {
        std::vector<Mat> pv(std::size_t(outcomes), Mat::Zero(d, d));
        for (int i = 0; i < d; ++i) {
          const Vec e = es.eigenvectors().col(i);
          pv[rng.below(std::uint64_t(outcomes))] += e * e.adjoint();
        }
        a.push_back(pv);
      }
    }
    std::vector<std::vector<int>> values(static_cast<std::size_t>(ng), std::vector<int>(static_cast<std::size_t>(points), 0));
    for (auto& row : values)
      for (int& x : row) x = int(rng.below(std::uint64_t(outcomes)));
    const auto audit = audit_consolidation(s, a, values);
    gap = std::max(gap, audit.sdp.gap);
    slack = std::max(slack, audit.sdp.max_slackness);
    margin = std::min(margin, audit.margin);
    if (trial % 2 == 0) tight = std::min(tight, audit.margin);
    o.require(audit.sdp.gap <= 1e-6, "duality gap " + fmt("%.3g", audit.sdp.gap));
    o.require(audit.sdp.max_slackness <= 1e-5, "slackness " + fmt("%.3g", audit.sdp.max_slackness));
    o.require(submeasurement(audit.s, 1e-9), "S^g is not a sub-measurement");
    o.require(submeasurement(improved_submeasurement(audit.sdp.t, a, values), 1e-9), "improved family");
    o.require(audit.passed, "audit margin " + fmt("%.3g", audit.margin));
  }
  const double t = seconds_since(t0);
  o.require(t < 300.0, "runtime " + fmt("%.1f s", t));
  if (o.pass)
    o.detail = "max gap " + fmt("%.2g", gap) + ", max slackness " + fmt("%.2g", slack) + ", min audit margin " +
               fmt("%.3g", margin) + " (" + fmt("%.3g", tight) + " with consistent A)";
  return o;
}

Outcome consistency() {
  Outcome o;
  Rng rng = Rng::stream(9, "acceptance.consistency");
  // Diagonal projectors on a maximally entangled state: basis vector i belongs
  // to function owner[i], and A_v reads that function's value at v.
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + int(rng.below(4)), ng = 1 + int(rng.below(std::uint64_t(d))), points = 1 + int(rng.below(3));
    const int outcomes = 2 + int(rng.below(2));
    std::vector<int> owner(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < d; ++i) owner[std::size_t(i)] = i < ng ? i : int(rng.below(std::uint64_t(ng)));
    std::vector<std::vector<int>> values(static_cast<std::size_t>(ng), std::vector<int>(static_cast<std::size_t>(points), 0));
    for (auto& row : values)
      for (int& x : row) x = int(rng.below(std::uint64_t(outcomes)));
    std::vector<Mat> m(std::size_t(ng), Mat::Zero(d, d));
    std::vector<std::vector<Mat>> a(std::size_t(points), std::vector<Mat>(std::size_t(outcomes), Mat::Zero(d, d)));
    for (int i = 0; i < d; ++i) {
      const int g = owner[std::size_t(i)];
      m[std::size_t(g)](i, i) = 1;
      for (int v = 0; v < points; ++v) a[std::size_t(v)][std::size_t(values[std::size_t(g)][std::size_t(v)])](i, i) = 1;
    }
    const auto c = consistency_metrics(m, values, a, ghz_state(2, d));
    o.require(c.delta == 0 && c.gamma == 0 && c.eta == 0,
              "nonzero metrics " + fmt("%.3g", c.delta) + " " + fmt("%.3g", c.gamma) + " " + fmt("%.3g", c.eta));
  }

  double worst = -1e9;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2;
    const auto s = trial % 2 ? gen::random_symmetric_state(3, d, rng) : ghz_state(3, d);
    const auto a = gen::random_projective(d, 2, rng);
    const Mat h = gen::random_hermitian(d, rng) * (0.02 * double(1 + trial % 10));
    Eigen::ComplexEigenSolver<Mat> es(cplx(0, 1) * h);
    const Mat u = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() * es.eigenvectors().inverse();
    std::vector<Mat> b;
    for (const auto& x : a) b.push_back(u * x * u.adjoint());
    const auto c = closeness_from_consistency(a, b, s);
    worst = std::max(worst, c.lhs - c.bound);
    o.require(c.lhs <= c.bound + 1e-12, "closeness lhs " + fmt("%.3g", c.lhs) + " > " + fmt("%.3g", c.bound));
  }
  if (o.pass) o.detail = "20 exact-zero instances, 100 closeness audits (max lhs - bound " + fmt("%.3g", worst) + ")";
  return o;
}

// Symmetric random game: pi and V depend only on the multiset of (q_i, a_i).
ExplicitGame random_symmetric_game(int r, Rng& rng) {
  ExplicitGame g("random", r, {"q0", "q1"}, {"a0", "a1"});
  std::map<std::vector<int>, std::int64_t> base;
  std::vector<std::vector<int>> tuples;
  std::int64_t total = 0;
  for (int mask = 0; mask < (1 << r); ++mask) {
    std::vector<int> q(static_cast<std::size_t>(r), 0);
    for (int i = 0; i < r; ++i) q[std::size_t(i)] = mask >> i & 1;
    auto key = q;
    std::sort(key.begin(), key.end());
    if (!base.count(key)) base[key] = std::int64_t(rng.below(3)) + (mask == 0);
    total += base[key];
    tuples.push_back(q);
  }
  for (const auto& t : tuples) {
    auto key = t;
    std::sort(key.begin(), key.end());
    if (base[key]) g.add_question(t, Rational(base[key], total));
  }
  const std::uint64_t salt = rng.next();
  g.set_checker("random", [salt](std::span<const int> q, std::span<const int> a) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < q.size(); ++i) pairs.push_back({q[i], a[i]});
    std::sort(pairs.begin(), pairs.end());
    std::uint64_t h = salt;
    for (auto [x, y] : pairs) h = (h ^ std::uint64_t(x * 31 + y + 1)) * 0x100000001b3ULL;
    return (h >> 17) % 3 != 0;
  });
  g.set_symmetric(true);
  g.validate();
  return g;
}

Outcome symmetrization() {
  Outcome o;
  Rng rng = Rng::stream(10, "acceptance.sym");
  double dv = 0, res = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = random_symmetric_game(2 + int(rng.below(2)), rng);
    QuantumStrategy s;
    s.dims.assign(std::size_t(g.players()), 2);
    s.state = gen::random_state(s.total_dim(), rng);
    s.povms.assign(std::size_t(g.players()), {});
    for (int i = 0; i < g.players(); ++i)
      for (int q = 0; q < g.num_questions(); ++q) s.povms[std::size_t(i)].push_back(gen::random_povm(2, 2, rng));
    const auto out = symmetrize(g, s);
    dv = std::max(dv, std::abs(evaluate_quantum(g, out) - evaluate_quantum(g, s)));
    res = std::max(res, swap_invariance_residual(out.state, out.dims));
  }
  o.require(dv <= 1e-9, "value moved by " + fmt("%.3g", dv));
  o.require(res <= 1e-10, "swap residual " + fmt("%.3g", res));
  if (o.pass) o.detail = "max value change " + fmt("%.2g", dv) + ", max swap residual " + fmt("%.2g", res);
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "nlg-acceptance-replay";
  fs::remove_all(dir);
  const std::string out = dir.string();
  std::ostringstream sink;
  auto nlg = [&](std::vector<std::string> args) {
    std::ostringstream err;
    const int code = cli::run(args, sink, err);
    std::string cmd;
    for (std::size_t i = 2; i < args.size(); ++i) cmd += " " + args[i];
    o.require(code == 0, "nlg" + cmd + " exited " + std::to_string(code) + ": " + err.str());
  };
  nlg({"--out", out, "eval", "builtin:chsh", "--exact", "--brute-classical", "--quantum", "canned:chsh", "--xor-sdp"});
  for (const char* stage : {"gphi", "repeat", "xor"})
    nlg({"--out", out, "compile", kData + "/tiny.cnf", "--stage", stage, "--repeat-k", "2", "--repeat-k2", "2"});
  nlg({"--out", out, "--seed", "7", "--jobs", "2", "eval", out + "/tiny.xor.sampler", "--honest", "--witness", "1110",
       "--rounds", "2000"});
  nlg({"--out", out, "metrics", kData + "/triangle.metrics", "--consistency", "--robust", "--consolidate"});

  std::vector<fs::path> manifests;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().string().ends_with(".manifest.json")) manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());
  o.require(manifests.size() >= 6, "only " + std::to_string(manifests.size()) + " manifests");
  for (const auto& m : manifests) {
    std::ostringstream rout, rerr;
    const int code = cli::run({"--out", out, "replay", m.string()}, rout, rerr);
    o.require(code == 0 && rout.str().find("DIFFERS") == std::string::npos,
              m.filename().string() + " replay exited " + std::to_string(code));
  }
  if (o.pass) o.detail = std::to_string(manifests.size()) + " manifests replay bit-identically";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"CHSH classical value", chsh_classical},
      {"CHSH quantum value and SDP bias", chsh_quantum},
      {"completeness of the five tests", completeness},
      {"XOR gadget completeness", xor_gadget},
      {"3-SAT soundness smoke", soundness},
      {"polynomial core", polynomial_core},
      {"predicate to QUADEQ equivalence", quadeq_encoding},
      {"consolidation SDP lab", sdp_lab},
      {"consistency metrics", consistency},
      {"symmetrization", symmetrization},
      {"CLI determinism", determinism},
  };
  int failures = 0, k = 0;
  for (const auto& [name, run] : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%2d %s  %-34s %s (%.1f s)\n", k, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", k - failures, k);
  return failures == 0 ? 0 : 1;
}
