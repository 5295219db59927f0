#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlg::cli::run;

namespace {

const std::string kData = NLG_TEST_DATA;

struct Run {
  int code;
  std::string out, err;
};

Run nlg_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nlg-cli-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json sidecar(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("eval on the built-in CHSH game") {
  const auto dir = scratch("chsh");
  const auto r = nlg_run({"--out", dir.string(), "eval", "builtin:chsh", "--exact", "--brute-classical", "--quantum",
                          "canned:chsh"});
  REQUIRE(r.code == 0);
  const auto j = sidecar(dir / "chsh.eval.json");
  CHECK(j["classical value"]["value"]["num"] == 3);
  CHECK(j["classical value"]["value"]["den"] == 4);
  CHECK(std::abs(j["quantum value"]["value"].get<double>() - 0.8535533906) < 1e-10);
  CHECK(r.out.find("3/4") != std::string::npos);
  CHECK(fs::exists(dir / "chsh.eval.manifest.json"));

  // The optimal strategy file evaluates back to 3/4 exactly.
  const auto r2 = nlg_run({"--out", dir.string(), "eval", "builtin:chsh", "--strategy",
                           (dir / "chsh.classical.strategy").string(), "--report", "again"});
  REQUIRE(r2.code == 0);
  CHECK(sidecar(dir / "again.json")["strategy file"]["value"]["num"] == 3);
}

TEST_CASE("compile, honest eval, replay") {
  const auto dir = scratch("pipeline");
  for (const char* stage : {"gphi", "binary", "oracular", "repeat", "xor"}) {
    const auto r = nlg_run({"--out", dir.string(), "compile", kData + "/tiny.cnf", "--stage", stage, "--q", "7",
                            "--repeat-k", "2", "--repeat-k2", "2", "--probe-rounds", "8"});
    INFO(stage, r.err);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / (std::string("tiny.") + stage + ".sampler")));
  }
  CHECK(sidecar(dir / "tiny.binary.compile.json")["binary"]["answer bits"] == "1");

  const auto e = nlg_run({"--out", dir.string(), "--seed", "11", "eval", (dir / "tiny.repeat.sampler").string(),
                          "--honest", "--witness", "1110", "--rounds", "300"});
  REQUIRE(e.code == 0);
  const auto j = sidecar(dir / "tiny.repeat.eval.json");
  CHECK(j["honest"]["accepted"] == 300);
  CHECK(j["honest"]["value"] == 1.0);

  // Same run with more workers gives the same report.
  const auto e4 = nlg_run({"--out", dir.string(), "--seed", "11", "--jobs", "4", "eval",
                           (dir / "tiny.repeat.sampler").string(), "--honest", "--witness", "1110", "--rounds", "300",
                           "--report", "jobs4"});
  REQUIRE(e4.code == 0);
  CHECK(slurp(dir / "jobs4.txt") == slurp(dir / "tiny.repeat.eval.txt"));

  for (const char* m : {"tiny.xor.compile.manifest.json", "tiny.repeat.eval.manifest.json"}) {
    const auto rp = nlg_run({"--out", dir.string(), "replay", (dir / m).string()});
    INFO(m, rp.out, rp.err);
    CHECK(rp.code == 0);
    CHECK(rp.out.find("DIFFERS") == std::string::npos);
  }

  // A manifest whose recorded hash disagrees is reported as a mismatch.
  auto man = nlohmann::json::parse(slurp(dir / "tiny.xor.compile.manifest.json"));
  CHECK(man["outputs"][0]["path"] == "tiny.xor.sampler");
  man["outputs"][1]["sha256"] = std::string(64, '0');
  { std::ofstream(dir / "forged.manifest.json") << man.dump(); }
  const auto forged = nlg_run({"--out", dir.string(), "replay", (dir / "forged.manifest.json").string()});
  CHECK(forged.code == 1);
  CHECK(forged.out.find("DIFFERS") != std::string::npos);

  // A changed input blocks replay.
  const auto tmp = dir / "copy.cnf";
  fs::copy_file(kData + "/tiny.cnf", tmp);
  REQUIRE(nlg_run({"--out", dir.string(), "compile", tmp.string(), "--stage", "gphi", "--q", "7"}).code == 0);
  { std::ofstream(tmp, std::ios::app) << "c edited\n"; }
  CHECK(nlg_run({"--out", dir.string(), "replay", (dir / "copy.gphi.compile.manifest.json").string()}).code == 2);
}

TEST_CASE("violated clauses lower the honest value") {
  const auto dir = scratch("soundness");
  REQUIRE(nlg_run({"--out", dir.string(), "compile", kData + "/tiny.cnf", "--stage", "gphi", "--q", "7"}).code == 0);
  const auto e = nlg_run({"--out", dir.string(), "eval", (dir / "tiny.gphi.sampler").string(), "--honest", "--witness",
                          "0010", "--rounds", "2000"});
  REQUIRE(e.code == 0);
  const auto j = sidecar(dir / "tiny.gphi.eval.json");
  CHECK(j["witness"]["violated clause fraction"].get<double>() > 0);
  CHECK(j["honest"]["rejected"].get<int>() > 0);
}

TEST_CASE("metrics") {
  const auto dir = scratch("metrics");
  const auto r = nlg_run({"--out", dir.string(), "metrics", kData + "/epr_basis.metrics", "--consistency"});
  REQUIRE(r.code == 0);
  const auto j = sidecar(dir / "epr_basis.metrics.json");
  CHECK(j["consistency"]["delta"] == 0.0);
  CHECK(j["consistency"]["gamma"] == 0.0);
  CHECK(j["consistency"]["eta"] == 0.0);

  const auto t = nlg_run({"--out", dir.string(), "metrics", kData + "/triangle.metrics", "--robust", "--consolidate",
                          "--steps", "2"});
  REQUIRE(t.code == 0);
  const auto k = sidecar(dir / "triangle.metrics.json");
  CHECK(k["robust triple"]["mixing distance step 1"].get<double>() == doctest::Approx(2.0 / 3));
  CHECK(k["consolidation"]["audit passed"] == true);
  CHECK(k["consolidation"]["duality gap"].get<double>() <= 1e-6);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  const std::string out = dir.string();
  CHECK(nlg_run({"--out", out, "compile", kData + "/missing.cnf"}).code == 2);
  CHECK(nlg_run({"--out", out, "eval", "builtin:chsh"}).code == 2);
  CHECK(nlg_run({"--out", out, "eval", "builtin:nope", "--exact", "--brute-classical"}).code == 2);
  CHECK(nlg_run({"--out", out, "eval", "builtin:chsh", "--bogus"}).code == 2);
  CHECK(nlg_run({"--out", out, "--cap", "10", "eval", "builtin:chsh", "--brute-classical"}).code == 3);
  CHECK(nlg_run({"--out", out, "compile", kData + "/tiny.cnf", "--stage", "xor", "--table"}).code == 2);
  CHECK(nlg_run({"--out", out, "metrics", kData + "/tiny.cnf", "--consistency"}).code == 2);
  CHECK(nlg_run({"--help"}).code == 0);
}

TEST_CASE("table cache") {
  const auto dir = scratch("cache");
  const auto cache = dir / "cache";
  setenv("NLG_CACHE_DIR", cache.string().c_str(), 1);
  const std::vector<std::string> args{"--out", dir.string(), "compile", kData + "/tiny.cnf", "--stage", "xor"};
  REQUIRE(nlg_run(args).code == 0);
  const std::string first = slurp(dir / "tiny.xor.compile.txt");
  CHECK(!fs::is_empty(cache));
  REQUIRE(nlg_run(args).code == 0);
  CHECK(slurp(dir / "tiny.xor.compile.txt") == first);
  const auto man = nlohmann::json::parse(slurp(dir / "tiny.xor.compile.manifest.json"));
  CHECK(man["notes"][0].get<std::string>().rfind("table cache hit", 0) == 0);
  unsetenv("NLG_CACHE_DIR");
}
