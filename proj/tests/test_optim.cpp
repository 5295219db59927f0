#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gen_quantum.hpp"
#include "nlg/optim.hpp"

using namespace nlg;

namespace {

Mat diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d[i++] = x;
  return d.cast<cplx>().asDiagonal();
}

// max Tr(T C) over 0 <= T <= Id.
SdpProblem box_problem(const Mat& c, bool hermitian) {
  SdpProblem p;
  p.hermitian = hermitian;
  const int t = p.add_block(int(c.rows()));
  const int s = p.add_block(int(c.rows()));
  p.objective[t] = c;
  add_matrix_equality(p, {{t, 1.0}, {s, 1.0}}, Mat::Identity(c.rows(), c.rows()));
  return p;
}

Mat random_density(int d, Rng& rng) {
  const Mat g = gen::gaussian(d, d, rng);
  Mat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

// Two-register state with amplitude matrix rho^{1/2}, rho real.
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

struct Family {
  std::vector<std::vector<Mat>> a;
  std::vector<std::vector<int>> values;
};

Family random_family(int d, int points, int outcomes, int functions, Rng& rng) {
  Family f;
  for (int v = 0; v < points; ++v) f.a.push_back(gen::random_projective(d, outcomes, rng));
  for (int g = 0; g < functions; ++g) {
    std::vector<int> row(points);
    for (int& x : row) x = int(rng.below(std::uint64_t(outcomes)));
    f.values.push_back(row);
  }
  return f;
}

ExplicitGame xor_game(const Eigen::Matrix2i& f, const std::vector<Rational>& pi, const std::string& name) {
  ExplicitGame g(name, 2, {"0", "1"}, {"0", "1"});
  std::vector<std::pair<std::vector<int>, std::vector<int>>> acc;
  for (int s = 0; s < 2; ++s)
    for (int t = 0; t < 2; ++t) {
      if (pi[2 * s + t].num() != 0) g.add_question({s, t}, pi[2 * s + t]);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if ((a ^ b) == f(s, t)) acc.push_back({{s, t}, {a, b}});
    }
  g.set_accept_table(acc);
  g.set_xor(true);
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("solver examples") {
  SUBCASE("scalar inequality") {
    SdpProblem p;
    const int t = p.add_block(1);
    p.objective[t] = Mat::Constant(1, 1, 1.0);
    p.constraints.push_back({{Mat::Constant(1, 1, 1.0)}, 1.0, Sense::Le});
    const auto s = solve_sdp(p);
    CHECK(std::abs(s.primal_value - 1) <= 1e-7);
    CHECK(s.gap <= 1e-7);
    CHECK(s.converged);
  }
  SUBCASE("lower bound") {
    SdpProblem p;
    const int t = p.add_block(1);
    p.objective[t] = Mat::Constant(1, 1, -1.0);
    p.constraints.push_back({{Mat::Constant(1, 1, 1.0)}, 2.0, Sense::Ge});
    CHECK(std::abs(solve_sdp(p).primal_value + 2) <= 1e-7);
  }
  SUBCASE("box with diag(2, -1)") {
    const auto s = solve_sdp(box_problem(diag({2, -1}), false));
    CHECK(std::abs(s.primal_value - 2) <= 1e-7);
    CHECK((s.primal[0] - diag({1, 0})).norm() <= 1e-4);
  }
  SUBCASE("infeasible") {
    SdpProblem p;
    const int t = p.add_block(1);
    p.objective[t] = Mat::Constant(1, 1, 1.0);
    p.constraints.push_back({{Mat::Constant(1, 1, 1.0)}, -1.0, Sense::Eq});
    CHECK_THROWS_AS(solve_sdp(p), SdpUnsolved);
    try {
      solve_sdp(p);
    } catch (const SdpUnsolved& e) {
      CHECK(e.kind() == ErrorKind::Unsolved);
      CHECK(!e.best().log.empty());
    }
  }
  SUBCASE("shape and size checks") {
    SdpProblem p;
    p.add_block(150);
    p.add_block(60);
    CHECK_THROWS_AS(solve_sdp(p), Error);
    SdpProblem q;
    const int t = q.add_block(2);
    q.objective[t] = Mat::Identity(3, 3);
    CHECK_THROWS_AS(solve_sdp(q), Error);
    SdpProblem h;
    const int u = h.add_block(2);
    h.objective[u] = Mat::Zero(2, 2);
    h.objective[u](0, 1) = cplx(0, 1);
    h.objective[u](1, 0) = cplx(0, -1);
    CHECK_THROWS_AS(solve_sdp(h), Error);  // complex data in a real problem
  }
}

TEST_CASE("solver against the eigenvalue oracle") {
  Rng rng = Rng::stream(11, "sdp");
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + int(rng.below(5));
    const bool herm = trial % 2;
    Mat c = gen::random_hermitian(d, rng);
    if (!herm) c = c.real().cast<cplx>();
    const auto s = solve_sdp(box_problem(c, herm));
    Eigen::SelfAdjointEigenSolver<Mat> es(c);
    const double oracle = es.eigenvalues().cwiseMax(0.0).sum();
    REQUIRE(std::abs(s.primal_value - oracle) <= 1e-6);
    REQUIRE(s.primal_value <= s.dual_value + 1e-7);
    REQUIRE(s.primal_residual <= 1e-7);
    REQUIRE(s.dual_residual <= 1e-7);
  }
}

TEST_CASE("SDPA dump") {
  std::ostringstream os;
  write_sdpa(os, box_problem(diag({2, -1}), false));
  std::istringstream in(os.str());
  std::string comment;
  std::getline(in, comment);
  CHECK(comment[0] == '*');
  int m, nb, b1, b2;
  in >> m >> nb >> b1 >> b2;
  CHECK(m == 3);
  CHECK(nb == 2);
  CHECK(b1 == 2);
  CHECK(b2 == 2);
  double rhs[3];
  in >> rhs[0] >> rhs[1] >> rhs[2];
  CHECK(rhs[0] == 1);
  CHECK(rhs[1] == 0);
  CHECK(rhs[2] == 1);
  int mat, blk, i, j;
  double v;
  in >> mat >> blk >> i >> j >> v;
  CHECK(mat == 0);
  CHECK(v == 2);
}

TEST_CASE("consolidation SDP") {
  Rng rng = Rng::stream(12, "consolidation");
  SUBCASE("single function with Abar = Id") {
    const Mat rho = random_density(3, rng);
    const auto r = consolidation_sdp(rho, {Mat::Identity(3, 3)});
    CHECK(std::abs(r.omega - 1) <= 1e-8);
    CHECK((r.t[0] - Mat::Identity(3, 3)).norm() <= 1e-6);
  }
  SUBCASE("commuting diagonal family") {
    for (int trial = 0; trial < 10; ++trial) {
      const int d = 2 + int(rng.below(4)), ng = 1 + int(rng.below(4));
      Eigen::VectorXd lam(d);
      for (int i = 0; i < d; ++i) lam[i] = 0.1 + rng.uniform();
      lam /= lam.sum();
      std::vector<Mat> abar;
      Eigen::VectorXd best = Eigen::VectorXd::Zero(d);
      for (int g = 0; g < ng; ++g) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = rng.uniform();
        best = best.cwiseMax(v);
        abar.push_back(v.cast<cplx>().asDiagonal());
      }
      const auto r = consolidation_sdp(lam.cast<cplx>().asDiagonal(), abar);
      REQUIRE(std::abs(r.omega - lam.dot(best)) <= 1e-7);
    }
  }
  SUBCASE("random instances: duality, slackness, normalization") {
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 2 + int(rng.below(5)), ng = 1 + int(rng.below(4));
      const Mat rho = random_density(d, rng);
      const Family f = random_family(d, 3, 1 + int(rng.below(3)), ng, rng);
      const auto abar = averaged_conjugates(f.a, f.values);
      const auto r = consolidation_sdp(rho, abar);
      REQUIRE(r.gap <= 1e-6);
      REQUIRE(r.max_slackness <= 1e-5);
      REQUIRE(r.normalization_residual <= 1e-12);
      REQUIRE(r.dual_violation <= 1e-8);
      for (const auto& t : r.t) REQUIRE(min_eigenvalue(t) >= -1e-9);
      // Any sub-measurement is feasible, so it cannot beat the optimum.
      const auto q = gen::random_povm(d, ng + 1, rng);
      const std::vector<Mat> sub(q.begin(), q.begin() + ng);
      REQUIRE(consolidation_objective(rho, abar, sub) <= r.omega + 1e-8);
      REQUIRE(consolidation_objective(rho, abar, r.t) >= r.omega - 1e-8);
    }
  }
  SUBCASE("singular rho is solved on its support") {
    const Mat rho = diag({0.5, 0.5, 0});
    const auto r = consolidation_sdp(rho, {diag({1, 0, 1}), diag({0, 1, 0})});
    CHECK(std::abs(r.omega - 1) <= 1e-8);
    Mat total = Mat::Zero(3, 3);
    for (const auto& t : r.t) total += t;
    CHECK((total - Mat::Identity(3, 3)).norm() <= 1e-12);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(consolidation_sdp(diag({0.5, 0.6}), {Mat::Identity(2, 2)}), Error);
    CHECK_THROWS_AS(consolidation_sdp(diag({0.5, 0.5}), {2 * Mat::Identity(2, 2)}), Error);
    CHECK_THROWS_AS(consolidation_sdp(diag({0.5, 0.5}), {Mat::Identity(3, 3)}), Error);
  }
}

TEST_CASE("improved sub-measurement") {
  Rng rng = Rng::stream(13, "improved");
  SUBCASE("uniform T and projective A") {
    const Family f = random_family(3, 4, 2, 3, rng);
    const std::vector<Mat> t(3, Mat::Identity(3, 3) / 3);
    const auto s = improved_submeasurement(t, f.a, f.values);
    for (int g = 0; g < 3; ++g) {
      Mat expect = Mat::Zero(3, 3);
      for (int v = 0; v < 4; ++v) expect += f.a[v][f.values[g][v]] / 4.0 / 3.0;
      CHECK((s[g] - expect).norm() <= 1e-12);
    }
  }
  SUBCASE("single point") {
    const auto a = gen::random_povm(2, 2, rng);
    const auto t = gen::random_povm(2, 2, rng);
    const auto s = improved_submeasurement(t, {a}, {{1}, {0}});
    CHECK((s[0] - a[1] * t[0] * a[1]).norm() <= 1e-14);
    CHECK((s[1] - a[0] * t[1] * a[0]).norm() <= 1e-14);
  }
  SUBCASE("random instances stay sub-measurements") {
    for (int trial = 0; trial < 100; ++trial) {
      const int d = 1 + int(rng.below(4)), ng = 1 + int(rng.below(4));
      const Family f = random_family(d, 1 + int(rng.below(4)), 1 + int(rng.below(3)), ng, rng);
      auto t = gen::random_povm(d, ng + 1, rng);
      t.pop_back();
      const auto s = improved_submeasurement(t, f.a, f.values);
      Mat total = Mat::Zero(d, d);
      for (const auto& x : s) {
        REQUIRE(min_eigenvalue(x) >= -1e-12);
        REQUIRE(min_eigenvalue(Mat::Identity(d, d) - x) >= -1e-12);
        total += x;
      }
      REQUIRE(min_eigenvalue(Mat::Identity(d, d) - total) >= -1e-12);
    }
  }
}

TEST_CASE("consolidation audit") {
  Rng rng = Rng::stream(14, "audit");
  double worst = 1e9;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + int(rng.below(3));
    const auto s = canonical_state(d, rng);
    const Family f = random_family(d, 2 + int(rng.below(3)), 2, 1 + int(rng.below(4)), rng);
    const auto audit = audit_consolidation(s, f.a, f.values);
    REQUIRE(audit.passed);
    worst = std::min(worst, audit.margin);
    // Item-one style bound: omega >= Tr_rho(Q) - consistency(Q, A) exactly on these states.
    auto q = gen::random_povm(d, int(f.values.size()) + 1, rng);
    q.pop_back();
    const auto cm = consistency_metrics(q, f.values, f.a, s);
    REQUIRE(audit.sdp.omega >= 1 - cm.eta - cm.delta - 1e-8);
  }
  CHECK(worst >= 0);
  // The audit requires the canonical amplitude form.
  const auto ghz = ghz_state(2, 2);
  const Family f = random_family(2, 2, 2, 2, rng);
  CHECK_NOTHROW(audit_consolidation(ghz, f.a, f.values));
  MultiRegisterState twisted{2, 2, Vec::Zero(4)};
  twisted.amp[1] = twisted.amp[2] = 1 / std::sqrt(2.0);
  CHECK_THROWS_AS(audit_consolidation(twisted, f.a, f.values), Error);
}

TEST_CASE("complement state") {
  Rng rng = Rng::stream(15, "complement");
  for (int trial = 0; trial < 50; ++trial) {
    const int r = 2 + int(rng.below(2)), d = 2;
    const auto s = gen::random_symmetric_state(r, d, rng);
    const auto e = gen::random_povm(d, 2, rng);
    const auto c = complement_state(s, e[0] * 0.9);
    REQUIRE(c.residual <= c.bound + 1e-12);
    REQUIRE(c.z * c.z >= c.z_floor - 1e-12);
    REQUIRE(std::abs(c.phi.amp.norm() - 1) <= 1e-12);
  }
  CHECK_THROWS_AS(complement_state(ghz_state(2), Mat::Identity(2, 2)), Error);
}

TEST_CASE("XOR bias SDP") {
  const auto chsh = xor_bias_sdp_2player(chsh_game());
  CHECK(std::abs(chsh.bias - std::sqrt(2.0) / 2) <= 1e-6);
  CHECK(std::abs(chsh.gram(0, 0) - 1) <= 1e-7);

  const Rational quarter(1, 4);
  const auto constant = xor_game(Eigen::Matrix2i::Zero(), {quarter, quarter, quarter, quarter}, "const");
  CHECK(std::abs(xor_bias_sdp_2player(constant).bias - 1) <= 1e-6);

  Rng rng = Rng::stream(16, "xor");
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix2i f;
    for (int i = 0; i < 4; ++i) f(i / 2, i % 2) = int(rng.below(2));
    std::vector<std::int64_t> w(4);
    std::int64_t total = 0;
    for (auto& x : w) total += (x = 1 + std::int64_t(rng.below(5)));
    std::vector<Rational> pi;
    for (auto x : w) pi.emplace_back(x, total);
    const auto g = xor_game(f, pi, "random");
    const double classical = xor_bias(classical_value_bruteforce(g).value.to_double());
    REQUIRE(xor_bias_sdp_2player(g).bias >= classical - 1e-9);
  }

  ExplicitGame three("three", 3, {"0"}, {"0", "1"});
  three.add_question({0, 0, 0}, Rational(1));
  three.set_checker("odd", named_checker("odd"));
  three.set_xor(true);
  CHECK_THROWS_AS(xor_bias_sdp_2player(three), Error);
}

TEST_CASE("see-saw") {
  const auto g = chsh_game();
  const auto res = seesaw_lower_bound(g, {2, 2}, 10, 60, 7);
  CHECK(res.value >= 0.8535 - 1e-4);
  CHECK(res.value <= 0.5 + std::sqrt(2.0) / 4 + 1e-9);
  for (const auto& run : res.sweeps)
    for (std::size_t i = 1; i < run.size(); ++i) REQUIRE(run[i] >= run[i - 1]);
  CHECK(std::abs(evaluate_quantum(g, res.strategy) - res.value) <= 1e-12);

  // Initialized from the classical optimum it never ends below it.
  Rng rng = Rng::stream(17, "seesaw");
  for (int trial = 0; trial < 3; ++trial) {
    ExplicitGame h("h", 2, {"0", "1"}, {"0", "1", "2"});
    std::vector<std::pair<std::vector<int>, std::vector<int>>> acc;
    for (int s = 0; s < 2; ++s)
      for (int t = 0; t < 2; ++t) {
        h.add_question({s, t}, Rational(1, 4));
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if (rng.bernoulli(0.3)) acc.push_back({{s, t}, {a, b}});
      }
    h.set_accept_table(acc);
    h.validate();
    const auto classical = classical_value_bruteforce(h);
    const auto init = embed_deterministic(h, classical.strategy);
    const auto out = seesaw_lower_bound(h, {2, 2}, 2, 20, 3, init);
    REQUIRE(out.value >= classical.value.to_double() - 1e-9);
    REQUIRE(out.value <= 1 + 1e-9);
  }
}
