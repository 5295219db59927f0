#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_internal.hpp"
#include "nlg/error.hpp"
#include "nlg/io.hpp"
#include "nlg/optim.hpp"
#include "nlg/quantumlab.hpp"

namespace fs = std::filesystem;

namespace nlg::cli {

namespace {

std::string stem_of(const std::string& path) {
  if (path.rfind("builtin:", 0) == 0) return path.substr(8);
  return fs::path(path).stem().string();
}

json config_json(const ReductionConfig& c) {
  return {{"q", c.q},
          {"eps1", c.eps1},
          {"exponent", c.exponent},
          {"repeat_k", c.repeat_k},
          {"repeat_k2", c.repeat_k2},
          {"xor_eps", c.xor_eps},
          {"xor_k", c.xor_k},
          {"xor_k2", c.xor_k2},
          {"max_subset", c.max_subset},
          {"max_answer_bits", c.max_answer_bits}};
}

// Longest question per stage over a few sampled rounds.
void probe_questions(Report& r, const RefereeGame& g, std::uint64_t seed, const std::string& stage, int rounds) {
  if (rounds == 0) return;
  std::size_t longest = 0, total = 0, asked = 0;
  int autos = 0;
  for (int i = 0; i < rounds; ++i) {
    Rng rng = Rng::stream(seed, "compile.probe." + stage, std::uint64_t(i));
    const Round round = g.sample(rng);
    autos += round.auto_accept;
    for (const auto& q : round.questions) {
      if (q.empty()) continue;
      longest = std::max(longest, q.size());
      total += q.size();
      ++asked;
    }
  }
  r.add("probe rounds", rounds);
  r.add("auto-accept rounds", autos);
  r.add("longest question bytes", std::uint64_t(longest));
  r.add("mean question bytes", asked ? double(total) / double(asked) : 0.0);
}

// Table of the final game, through the cache when NLG_CACHE_DIR is set.
// Failures are cached too and rethrown.
std::string table_for(Context& ctx, GamePtr game, const std::string& key) {
  const char* env = std::getenv("NLG_CACHE_DIR");
  fs::path cache;
  if (env && *env) {
    cache = fs::path(env);
    fs::create_directories(cache);
    if (fs::exists(cache / (key + ".game"))) {
      ctx.notes.push_back("table cache hit " + key);
      return read_file((cache / (key + ".game")).string());
    }
    if (fs::exists(cache / (key + ".none"))) {
      ctx.notes.push_back("table cache hit " + key);
      const std::string s = read_file((cache / (key + ".none")).string());
      const auto nl = s.find('\n');
      const int kind = std::stoi(s.substr(0, nl));
      throw Error(ErrorKind(kind), s.substr(nl + 1));
    }
    ctx.notes.push_back("table cache miss " + key);
  }
  try {
    const ExplicitGame t = compile_to_table(game, ctx.g.cap);
    std::ostringstream s;
    write_game(s, t, ctx.g.cap);
    if (!cache.empty()) {
      std::ofstream(cache / (key + ".game"), std::ios::binary) << s.str();
    }
    return s.str();
  } catch (const Error& e) {
    if (!cache.empty())
      std::ofstream(cache / (key + ".none"), std::ios::binary) << int(e.kind()) << '\n' << e.what();
    throw;
  }
}

std::vector<bool> parse_witness(Context& ctx, const std::string& w, int n) {
  std::vector<bool> x(n, false);
  if (!w.empty() && w.find_first_not_of("01") == std::string::npos && !fs::exists(w)) {
    require(int(w.size()) == n, ErrorKind::InvalidInput,
            "witness has " + std::to_string(w.size()) + " bits, formula has " + std::to_string(n) + " variables");
    for (int i = 0; i < n; ++i) x[i] = w[i] == '1';
    return x;
  }
  std::istringstream in(ctx.read_input(w));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (tok == "v" || tok == "s") continue;
      if (tok == "c" || tok == "SAT" || tok == "SATISFIABLE") break;
      int lit = 0;
      try {
        std::size_t pos = 0;
        lit = std::stoi(tok, &pos);
        require(pos == tok.size(), ErrorKind::InvalidInput, "");
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidInput, "witness: unexpected token '" + tok + "'");
      }
      if (lit == 0) continue;
      require(std::abs(lit) <= n, ErrorKind::InvalidInput, "witness literal " + tok + " out of range");
      x[std::abs(lit) - 1] = lit > 0;
    }
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------- compile

int cmd_compile(Context& ctx, const CompileOpts& o, std::ostream& out) {
  const std::string text = ctx.read_input(o.cnf);
  const Cnf cnf = parse_dimacs(text);
  const auto stages = build_pipeline(cnf, o.stage, o.cfg);
  ctx.parameters = {{"stage", o.stage}, {"config", config_json(o.cfg)}, {"table", o.table}, {"probe_rounds", o.probe}};
  for (const auto& st : stages) ctx.streams.push_back("compile.probe." + st.name);

  const std::string base = stem_of(o.cnf) + "." + o.stage;
  const std::string spec = write_sampler(o.stage, o.cfg, cnf);
  ctx.write_output(base + ".sampler", spec);

  Report r("compile");
  r.add("input", fs::path(o.cnf).filename().string());
  r.add("input sha256", sha256_hex(text));
  r.add("variables", cnf.n);
  r.add("clauses", std::uint64_t(cnf.clauses.size()));
  r.add("stage", o.stage);
  std::string chain;
  for (const auto& st : stages) chain += (chain.empty() ? "" : " -> ") + st.name;
  r.add("pipeline", chain);
  r.add("sampler spec", base + ".sampler");
  r.add("sampler sha256", sha256_hex(spec));
  for (const auto& st : stages) {
    r.section(st.name);
    r.add("game", st.game->name());
    r.add("players", st.game->players());
    r.add("xor", st.game->is_xor());
    for (const auto& [k, v] : st.info) r.add(k, v);
    probe_questions(r, *st.game, ctx.g.seed, st.name, o.probe);
  }

  r.section("table");
  r.add("cap", ctx.g.cap);
  try {
    const std::string table = table_for(ctx, stages.back().game, sha256_hex(spec + std::to_string(ctx.g.cap)));
    ctx.write_output(base + ".game", table);
    r.add("written", base + ".game");
    r.add("sha256", sha256_hex(table));
  } catch (const Error& e) {
    if (o.table) throw;
    r.add("written", "no");
    r.add("reason", std::string(e.what()));
  }
  ctx.finish(r, base + ".compile", out);
  return kOk;
}

// ---------------------------------------------------------------- eval

namespace {

struct LoadedGame {
  GamePtr game;
  std::shared_ptr<const ExplicitGame> table;
  std::optional<Stage> stage;
  std::optional<Cnf> cnf;
  std::string kind;
};

LoadedGame load_game(Context& ctx, const std::string& arg) {
  LoadedGame lg;
  if (arg.rfind("builtin:", 0) == 0) {
    require(arg == "builtin:chsh", ErrorKind::InvalidInput, "unknown builtin game '" + arg + "' (known: builtin:chsh)");
    lg.table = std::make_shared<ExplicitGame>(chsh_game());
    lg.game = lg.table;
    lg.kind = "table";
    return lg;
  }
  const std::string text = ctx.read_input(arg);
  if (text.rfind("nlg-game", 0) == 0) {
    std::istringstream in(text);
    lg.table = std::make_shared<ExplicitGame>(read_game(in));
    lg.game = lg.table;
    lg.kind = "table";
  } else if (text.rfind("nlg-sampler", 0) == 0) {
    const SamplerSpec s = read_sampler(text);
    auto stages = build_pipeline(s.cnf, s.stage, s.cfg);
    lg.stage = stages.back();
    lg.game = lg.stage->game;
    lg.cnf = s.cnf;
    lg.kind = "sampler (" + s.stage + ")";
  } else {
    fail(ErrorKind::InvalidInput, "'" + arg + "' is neither a game table nor a sampler spec");
  }
  return lg;
}

const ExplicitGame& need_table(const LoadedGame& lg, const std::string& what) {
  require(lg.table != nullptr, ErrorKind::InvalidInput, what + " needs an explicit game table");
  return *lg.table;
}

void quantum_value(Report& r, const ExplicitGame& g, const QuantumStrategy& s) {
  const double v = evaluate_quantum(g, s);
  r.add("value", v);
  if (g.is_xor()) r.add("bias", xor_bias(v));
}

}  // namespace

int cmd_eval(Context& ctx, const EvalOpts& o, std::ostream& out) {
  require(!(o.honest && !o.strategy.empty()), ErrorKind::InvalidInput, "use either --strategy or --honest");
  require(!o.honest || !o.witness.empty(), ErrorKind::InvalidInput, "--honest needs --witness");
  require(!(o.exact && o.rounds), ErrorKind::InvalidInput, "use either --exact or --rounds");
  require(o.honest || !o.strategy.empty() || o.brute || !o.quantum.empty() || o.xor_sdp, ErrorKind::InvalidInput,
          "nothing to evaluate: give --strategy, --honest, --brute-classical, --quantum or --xor-sdp");

  const LoadedGame lg = load_game(ctx, o.game);
  ctx.parameters = {{"game", o.game},         {"strategy", o.strategy}, {"honest", o.honest},
                    {"witness", o.witness},   {"rounds", o.rounds},     {"exact", o.exact},
                    {"brute_classical", o.brute}, {"quantum", o.quantum}, {"xor_sdp", o.xor_sdp}};

  Report r("eval");
  r.section("game");
  r.add("name", lg.game->name());
  r.add("kind", lg.kind);
  r.add("players", lg.game->players());
  r.add("xor", lg.game->is_xor());
  if (lg.table) {
    r.add("questions", lg.table->num_questions());
    r.add("answers", lg.table->num_answers());
    r.add("question tuples", std::uint64_t(lg.table->distribution().size()));
  }

  std::shared_ptr<const Strategy> strat;
  std::string label;
  if (o.honest) {
    require(lg.stage.has_value(), ErrorKind::InvalidInput, "--honest needs a sampler spec from 'nlg compile'");
    const auto x = parse_witness(ctx, o.witness, lg.cnf->n);
    strat = lg.stage->honest(x);
    label = "honest";
    r.section("witness");
    std::string bits;
    for (bool b : x) bits += b ? '1' : '0';
    r.add("assignment", bits);
    r.add("violated clause fraction", lg.cnf->violated_fraction(x));
  } else if (!o.strategy.empty()) {
    const std::string text = ctx.read_input(o.strategy);
    std::istringstream in(text);
    if (text.rfind("nlg-strategy deterministic", 0) == 0) {
      const auto& t = need_table(lg, "a deterministic strategy file");
      strat = std::make_shared<DeterministicAdapter>(t, read_deterministic(in, t));
      label = "strategy file";
    } else if (text.rfind("nlg-strategy quantum", 0) == 0) {
      const auto& t = need_table(lg, "a quantum strategy file");
      r.section("quantum strategy");
      r.add("file", fs::path(o.strategy).filename().string());
      quantum_value(r, t, read_quantum(in, t));
    } else {
      fail(ErrorKind::InvalidInput, "'" + o.strategy + "' is not a strategy file");
    }
  }

  if (strat) {
    r.section(label);
    if (o.exact || (!o.rounds && !o.honest && strat->deterministic() && lg.table)) {
      const Rational v = evaluate_exact(*lg.game, *strat, ctx.g.cap);
      r.add("mode", "exact");
      r.add("value", v);
      if (lg.game->is_xor()) r.add("bias", xor_bias(v.to_double()));
    } else {
      const std::uint64_t n = o.rounds ? o.rounds : 10000;
      ctx.streams.push_back("round");
      const auto mc = monte_carlo_value(*lg.game, *strat, n, ctx.g.seed, ctx.g.jobs);
      r.add("mode", "monte carlo");
      r.add("seed", ctx.g.seed);
      r.add("rounds", mc.rounds);
      r.add("accepted", mc.accepted);
      r.add("rejected", mc.rounds - mc.accepted);
      r.add("value", mc.estimate);
      r.add("99% half-width", mc.half_width);
      r.add("interval low", std::max(0.0, mc.estimate - mc.half_width));
      r.add("interval high", std::min(1.0, mc.estimate + mc.half_width));
    }
  }

  if (o.brute) {
    const auto& t = need_table(lg, "--brute-classical");
    const auto best = classical_value_bruteforce(t, ctx.g.cap);
    r.section("classical value");
    r.add("value", best.value);
    if (t.is_xor()) r.add("bias", xor_bias(best.value.to_double()));
    std::ostringstream s;
    write_deterministic(s, t, best.strategy);
    const std::string name = (o.report.empty() ? stem_of(o.game) : o.report) + ".classical.strategy";
    ctx.write_output(name, s.str());
    r.add("optimal strategy", name);
  }

  if (!o.quantum.empty()) {
    const auto& t = need_table(lg, "--quantum");
    r.section("quantum value");
    if (o.quantum == "canned:chsh") {
      require(t.players() == 2 && t.num_questions() == 2 && t.num_answers() == 2, ErrorKind::InvalidInput,
              "canned:chsh needs a two-player game with binary questions and answers");
      r.add("strategy", "canned:chsh");
      quantum_value(r, t, chsh_canned().strategy);
    } else {
      const std::string text = ctx.read_input(o.quantum);
      std::istringstream in(text);
      r.add("strategy", fs::path(o.quantum).filename().string());
      quantum_value(r, t, read_quantum(in, t));
    }
  }

  if (o.xor_sdp) {
    const auto& t = need_table(lg, "--xor-sdp");
    const auto res = xor_bias_sdp_2player(t);
    r.section("xor sdp");
    r.add("bias", res.bias);
    r.add("value", 0.5 + res.bias / 2);
    r.add("duality gap", res.solution.gap);
    r.add("iterations", std::uint64_t(res.solution.log.size()));
  }

  const std::string base = o.report.empty() ? stem_of(o.game) + ".eval" : o.report;
  ctx.finish(r, base, out);
  return kOk;
}

// ---------------------------------------------------------------- metrics

int cmd_metrics(Context& ctx, const MetricsOpts& o, std::ostream& out) {
  require(o.consistency || o.robust || o.consolidate, ErrorKind::InvalidInput,
          "choose at least one of --consistency, --robust, --consolidate");
  std::istringstream in(ctx.read_input(o.file));
  const MetricsInput x = read_metrics(in);
  ctx.parameters = {{"input", o.file},
                    {"consistency", o.consistency},
                    {"robust", o.robust},
                    {"consolidate", o.consolidate},
                    {"steps", o.steps}};

  Report r("metrics");
  r.section("input");
  r.add("file", fs::path(o.file).filename().string());
  r.add("registers", x.state.registers);
  r.add("local dimension", x.state.dim);
  r.add("points", x.points);
  r.add("outcomes", x.outcomes);
  r.add("functions", std::uint64_t(x.values.size()));
  r.section("tolerances");
  r.add("psd floor", kPsdFloor);
  r.add("completeness slack", kCompletenessSlack);
  r.add("imaginary residue", kImagResidue);

  if (o.consistency) {
    require(!x.m.empty(), ErrorKind::InvalidInput, "--consistency needs an element per function");
    const auto c = consistency_metrics(x.m, x.values, x.a, x.state, x.weights);
    r.section("consistency");
    r.add("delta", c.delta);
    r.add("gamma", c.gamma);
    r.add("eta", c.eta);
    r.add("self-consistency of points", self_consistency(x.a, x.state, x.weights));
  }

  if (o.robust) {
    RobustTripleSpec spec{x.points, x.edges, x.outcomes, x.a, x.values};
    spec.validate();
    const auto& probe = x.probe.empty() ? x.m : x.probe;
    const auto m = robust_triple_metrics(spec, x.state, probe, o.steps);
    r.section("robust triple");
    r.add("delta1 self-consistency", m.self_consistency);
    r.add("delta2 max intersection", m.max_intersection);
    r.add("delta3 stability", m.stability);
    for (std::size_t k = 0; k < m.mixing.size(); ++k) r.add("mixing distance step " + std::to_string(k + 1), m.mixing[k]);
  }

  if (o.consolidate) {
    const auto a = audit_consolidation(x.state, x.a, x.values, x.weights);
    r.section("consolidation");
    r.add("omega", a.sdp.omega);
    r.add("dual value", a.sdp.dual_value);
    r.add("duality gap", a.sdp.gap);
    r.add("max slackness residual", a.sdp.max_slackness);
    r.add("dual violation", a.sdp.dual_violation);
    r.add("slack absorbed", a.sdp.slack_absorbed);
    r.add("iterations", a.sdp.iterations);
    r.add("trace of S", a.trace_s);
    r.add("measured delta-hat", a.self_consistency);
    r.add("bound omega - 2 sqrt(2 delta-hat)", a.bound);
    r.add("margin", a.margin);
    r.add("loose margin", a.loose_margin);
    r.add("audit passed", a.passed);
  }

  ctx.finish(r, o.report.empty() ? stem_of(o.file) + ".metrics" : o.report, out);
  return kOk;
}

}  // namespace nlg::cli
