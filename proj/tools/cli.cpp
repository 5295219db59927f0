#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "cli_internal.hpp"
#include "nlg/error.hpp"
#include "nlg/io.hpp"

namespace fs = std::filesystem;

namespace nlg::cli {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  require(EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) == 1, ErrorKind::InvalidInput,
          "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

// ---------------------------------------------------------------- report

json& Report::slot(const std::string& key) { return current_.empty() ? data_[key] : data_[current_][key]; }

void Report::section(const std::string& name) {
  current_ = name;
  rows_.emplace_back("", name);
  data_[name] = json::object();
}

void Report::add(const std::string& key, const std::string& v) {
  rows_.emplace_back(key, v);
  slot(key) = v;
}

void Report::add(const std::string& key, double v) {
  rows_.emplace_back(key, format_double(v));
  slot(key) = v;
}

void Report::add(const std::string& key, std::int64_t v) {
  rows_.emplace_back(key, std::to_string(v));
  slot(key) = v;
}

void Report::add(const std::string& key, std::uint64_t v) {
  rows_.emplace_back(key, std::to_string(v));
  slot(key) = v;
}

void Report::add(const std::string& key, bool v) {
  rows_.emplace_back(key, v ? "yes" : "no");
  slot(key) = v;
}

void Report::add(const std::string& key, const Rational& v) {
  rows_.emplace_back(key, v.str() + " = " + format_double(v.to_double()));
  slot(key) = json{{"num", v.num()}, {"den", v.den()}, {"value", v.to_double()}};
}

std::string Report::text() const {
  std::size_t width = 0;
  for (const auto& [k, v] : rows_) width = std::max(width, k.size());
  std::string out = title_ + "\n";
  for (const auto& [k, v] : rows_) {
    if (k.empty()) {
      out += "\n[" + v + "]\n";
      continue;
    }
    out += "  " + k + std::string(width - k.size() + 2, ' ') + v + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- context

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  require(bool(out), ErrorKind::InvalidInput, "cannot write '" + p.string() + "'");
  out << content;
  require(bool(out), ErrorKind::InvalidInput, "cannot write '" + p.string() + "'");
}

}  // namespace

std::string Context::read_input(const std::string& path) {
  std::string data = read_file(path);
  inputs.push_back({{"path", fs::absolute(path).lexically_normal().string()}, {"sha256", sha256_hex(data)}});
  return data;
}

void Context::write_output(const std::string& name, const std::string& content) {
  fs::create_directories(g.out);
  write_file(fs::path(g.out) / name, content);
  outputs.push_back({{"path", name}, {"sha256", sha256_hex(content)}});
}

void Context::finish(const Report& r, const std::string& base, std::ostream& out) {
  const std::string text = r.text();
  write_output(base + ".txt", text);
  write_output(base + ".json", r.sidecar().dump(2) + "\n");
  json m;
  m["tool"] = "nlg";
  m["format"] = 1;
  m["command"] = command;
  m["argv"] = argv;
  m["cwd"] = fs::current_path().string();
  m["out_dir"] = fs::absolute(g.out).lexically_normal().string();
  m["parameters"] = parameters;
  m["seeds"] = {{"seed", g.seed}, {"streams", streams}};
  m["jobs"] = g.jobs;
  m["cap"] = g.cap;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["notes"] = notes;
  m["started"] = started;
  m["finished"] = now_utc();
  write_file(fs::path(g.out) / (base + ".manifest.json"), m.dump(2) + "\n");
  out << text;
}

// ---------------------------------------------------------------- sampler spec

std::string write_sampler(const std::string& stage, const ReductionConfig& cfg, const Cnf& cnf) {
  std::ostringstream s;
  s << "nlg-sampler 1\n"
    << "stage " << stage << "\n"
    << "q " << cfg.q << "\n"
    << "eps1 " << format_double(cfg.eps1) << "\n"
    << "exponent " << format_double(cfg.exponent) << "\n"
    << "repeat-k " << cfg.repeat_k << "\n"
    << "repeat-k2 " << cfg.repeat_k2 << "\n"
    << "xor-eps " << format_double(cfg.xor_eps) << "\n"
    << "xor-k " << cfg.xor_k << "\n"
    << "xor-k2 " << cfg.xor_k2 << "\n"
    << "max-subset " << cfg.max_subset << "\n"
    << "max-answer-bits " << cfg.max_answer_bits << "\n"
    << "cnf\n";
  write_dimacs(s, cnf);
  s << "end-cnf\n";
  return s.str();
}

SamplerSpec read_sampler(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto bad = [](const std::string& why) { fail(ErrorKind::InvalidInput, "sampler spec: " + why); };
  if (!std::getline(in, line) || line != "nlg-sampler 1") bad("missing 'nlg-sampler 1' header");
  SamplerSpec s;
  for (;;) {
    if (!std::getline(in, line)) bad("missing 'cnf' block");
    if (line == "cnf") break;
    std::istringstream ls(line);
    std::string key, value, extra;
    if (!(ls >> key >> value) || (ls >> extra)) bad("malformed line '" + line + "'");
    try {
      if (key == "stage") s.stage = value;
      else if (key == "q") s.cfg.q = std::stoull(value);
      else if (key == "eps1") s.cfg.eps1 = std::stod(value);
      else if (key == "exponent") s.cfg.exponent = std::stod(value);
      else if (key == "repeat-k") s.cfg.repeat_k = std::stoi(value);
      else if (key == "repeat-k2") s.cfg.repeat_k2 = std::stoi(value);
      else if (key == "xor-eps") s.cfg.xor_eps = std::stod(value);
      else if (key == "xor-k") s.cfg.xor_k = std::stoi(value);
      else if (key == "xor-k2") s.cfg.xor_k2 = std::stoi(value);
      else if (key == "max-subset") s.cfg.max_subset = std::stoi(value);
      else if (key == "max-answer-bits") s.cfg.max_answer_bits = std::stoi(value);
      else bad("unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      bad("bad value for '" + key + "'");
    }
  }
  std::string dimacs;
  for (;;) {
    if (!std::getline(in, line)) bad("unterminated cnf block");
    if (line == "end-cnf") break;
    dimacs += line + "\n";
  }
  s.cnf = parse_dimacs(dimacs);
  s.cfg.validate();
  return s;
}

// ---------------------------------------------------------------- replay

namespace {

int cmd_replay(Context& ctx, const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  const json m = json::parse(ctx.read_input(manifest_path), nullptr, false);
  require(!m.is_discarded() && m.is_object() && m.value("tool", "") == "nlg", ErrorKind::InvalidInput,
          "'" + manifest_path + "' is not an nlg manifest");
  for (const auto* key : {"argv", "cwd", "inputs", "outputs", "command"})
    require(m.contains(key), ErrorKind::InvalidInput, std::string("manifest lacks '") + key + "'");

  Report r("replay");
  r.add("manifest", fs::path(manifest_path).filename().string());
  r.add("command", m["command"].get<std::string>());

  for (const auto& in : m["inputs"]) {
    const std::string path = in["path"];
    const std::string want = in["sha256"];
    require(fs::exists(path), ErrorKind::InvalidInput, "input '" + path + "' is gone");
    require(sha256_file(path) == want, ErrorKind::InvalidInput, "input '" + path + "' changed since the run");
  }
  r.add("inputs verified", std::uint64_t(m["inputs"].size()));

  const fs::path dir = fs::absolute(fs::path(ctx.g.out) / "replay" / fs::path(manifest_path).stem()).lexically_normal();
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::vector<std::string> args = m["argv"];
  args.push_back("--out");
  args.push_back(dir.string());
  const fs::path here = fs::current_path();
  std::ostringstream sink;
  fs::current_path(m["cwd"].get<std::string>());
  int code = 0;
  try {
    code = run(args, sink, err);
  } catch (...) {
    fs::current_path(here);
    throw;
  }
  fs::current_path(here);
  r.add("exit code", code);

  bool all = code == 0;
  r.section("outputs");
  for (const auto& o : m["outputs"]) {
    const std::string name = o["path"];
    const fs::path p = dir / name;
    const std::string got = fs::exists(p) ? sha256_file(p.string()) : "missing";
    const bool same = got == o["sha256"].get<std::string>();
    all = all && same;
    r.add(name, same ? "identical " + got : "DIFFERS recorded " + o["sha256"].get<std::string>() + " replayed " + got);
  }
  r.section("verdict");
  r.add("bit-identical", all);
  ctx.parameters["manifest"] = manifest_path;
  ctx.finish(r, "replay." + fs::path(manifest_path).stem().string(), out);
  return all ? kOk : kMismatch;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::TooLarge: return kCapExceeded;
    case ErrorKind::Unsolved:
    case ErrorKind::InvariantViolation: return kSolverFailure;
    default: return kInputError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlocal games toolkit: compile 3-SAT into games, evaluate strategies, measure consistency.", "nlg"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--seed", g.seed, "Master seed feeding every random stream")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads; results do not depend on it")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.add_option("--cap", g.cap, "Enumeration and table size cap")->capture_default_str();

  CompileOpts co;
  auto* compile = app.add_subcommand("compile", "Compile a DIMACS 3-CNF into a game");
  compile->add_option("cnf", co.cnf, "DIMACS file")->required();
  compile->add_option("--stage", co.stage, "Last reduction stage")
      ->check(CLI::IsMember({"gphi", "binary", "oracular", "repeat", "xor"}))
      ->capture_default_str();
  compile->add_option("--q", co.cfg.q, "Field size (0 picks a prime in [x, 2x], x = (log2 n / eps1)^exponent)");
  compile->add_option("--eps1", co.cfg.eps1)->capture_default_str();
  compile->add_option("--exponent", co.cfg.exponent)->capture_default_str();
  compile->add_option("--repeat-k", co.cfg.repeat_k)->capture_default_str();
  compile->add_option("--repeat-k2", co.cfg.repeat_k2)->capture_default_str();
  compile->add_option("--xor-eps", co.cfg.xor_eps)->capture_default_str();
  compile->add_option("--xor-k", co.cfg.xor_k)->capture_default_str();
  compile->add_option("--xor-k2", co.cfg.xor_k2)->capture_default_str();
  compile->add_option("--max-subset", co.cfg.max_subset)->capture_default_str();
  compile->add_option("--max-answer-bits", co.cfg.max_answer_bits)->capture_default_str();
  compile->add_flag("--table", co.table, "Fail unless an explicit table can be written");
  compile->add_option("--probe-rounds", co.probe, "Rounds sampled per stage for question lengths")
      ->check(CLI::Range(0, 100000))
      ->capture_default_str();

  EvalOpts eo;
  auto* eval = app.add_subcommand("eval", "Evaluate strategies against a game");
  eval->add_option("game", eo.game, "Game table, sampler spec, or builtin:chsh")->required();
  eval->add_option("--strategy", eo.strategy, "Deterministic or quantum strategy file");
  eval->add_flag("--honest", eo.honest, "Honest strategy of a compiled game");
  eval->add_option("--witness", eo.witness, "Assignment: 0/1 string or file of DIMACS literals");
  eval->add_option("--rounds", eo.rounds, "Monte Carlo rounds");
  eval->add_flag("--exact", eo.exact, "Exact evaluation by enumeration");
  eval->add_flag("--brute-classical", eo.brute, "Exact classical value by brute force");
  eval->add_option("--quantum", eo.quantum, "Quantum strategy file or canned:chsh");
  eval->add_flag("--xor-sdp", eo.xor_sdp, "Quantum bias of a two-player XOR game by SDP");
  eval->add_option("--report", eo.report, "Report base name");

  MetricsOpts mo;
  auto* metrics = app.add_subcommand("metrics", "Consistency, robustness and consolidation metrics");
  metrics->add_option("input", mo.file, "Metrics input file")->required();
  metrics->add_flag("--consistency", mo.consistency);
  metrics->add_flag("--robust", mo.robust);
  metrics->add_flag("--consolidate", mo.consolidate);
  metrics->add_option("--steps", mo.steps, "Random-walk steps for the mixing curve")
      ->check(CLI::Range(1, 1000))
      ->capture_default_str();
  metrics->add_option("--report", mo.report, "Report base name");

  std::string manifest;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare outputs bit for bit");
  replay->add_option("manifest", manifest)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  Context ctx;
  ctx.g = g;
  ctx.started = now_utc();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    ctx.argv.push_back(args[i]);
  }
  try {
    if (*compile) {
      ctx.command = "compile";
      return cmd_compile(ctx, co, out);
    }
    if (*eval) {
      ctx.command = "eval";
      return cmd_eval(ctx, eo, out);
    }
    if (*metrics) {
      ctx.command = "metrics";
      return cmd_metrics(ctx, mo, out);
    }
    ctx.command = "replay";
    return cmd_replay(ctx, manifest, out, err);
  } catch (const Error& e) {
    err << "nlg: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "nlg: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    err << "nlg: malformed manifest: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace nlg::cli
