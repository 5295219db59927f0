#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "nlg/rational.hpp"
#include "nlg/reductions.hpp"

namespace nlg::cli {

using json = nlohmann::json;

/// Aligned key/value text plus the same data as a JSON sidecar. Sections
/// nest one level deep in the sidecar.
class Report {
 public:
  explicit Report(std::string title) : title_(std::move(title)) {}

  void section(const std::string& name);
  void add(const std::string& key, const std::string& v);
  void add(const std::string& key, const char* v) { add(key, std::string(v)); }
  void add(const std::string& key, double v);
  void add(const std::string& key, std::int64_t v);
  void add(const std::string& key, int v) { add(key, std::int64_t(v)); }
  void add(const std::string& key, std::uint64_t v);
  void add(const std::string& key, bool v);
  void add(const std::string& key, const Rational& v);

  std::string text() const;
  const json& sidecar() const { return data_; }

 private:
  json& slot(const std::string& key);

  std::string title_;
  std::string current_;
  std::vector<std::pair<std::string, std::string>> rows_;  // empty key = section header
  json data_ = json::object();
};

struct Globals {
  std::string out = "nlg-out";
  std::uint64_t seed = 1;
  int jobs = 1;
  std::uint64_t cap = 1'000'000;
};

/// Per-invocation bookkeeping for the manifest.
struct Context {
  Globals g;
  std::string command;
  std::vector<std::string> argv;  // without --out
  json parameters = json::object();
  json inputs = json::array();
  json outputs = json::array();
  json notes = json::array();
  std::vector<std::string> streams;
  std::string started;

  /// Reads an input file and records its hash.
  std::string read_input(const std::string& path);
  /// Writes a file into the output directory and records its hash.
  void write_output(const std::string& name, const std::string& content);
  /// Writes <base>.txt, <base>.json and <base>.manifest.json; echoes the text.
  void finish(const Report& r, const std::string& base, std::ostream& out);
};

std::string read_file(const std::string& path);

// Sampler spec: stage, reduction knobs and the formula itself, so the game
// can be rebuilt without the original file.
std::string write_sampler(const std::string& stage, const ReductionConfig& cfg, const Cnf& cnf);
struct SamplerSpec {
  std::string stage;
  ReductionConfig cfg;
  Cnf cnf;
};
SamplerSpec read_sampler(const std::string& text);

struct CompileOpts {
  std::string cnf, stage = "xor";
  ReductionConfig cfg;
  bool table = false;
  int probe = 64;
};

struct EvalOpts {
  std::string game, strategy, witness, quantum, report;
  bool honest = false, exact = false, brute = false, xor_sdp = false;
  std::uint64_t rounds = 0;
};

struct MetricsOpts {
  std::string file, report;
  bool consistency = false, robust = false, consolidate = false;
  int steps = 8;
};

int cmd_compile(Context& ctx, const CompileOpts& o, std::ostream& out);
int cmd_eval(Context& ctx, const EvalOpts& o, std::ostream& out);
int cmd_metrics(Context& ctx, const MetricsOpts& o, std::ostream& out);

}  // namespace nlg::cli
