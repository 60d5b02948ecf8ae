// Copyright 2026 The kgreason Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kgr/cli.hpp"
#include "kgr/config.hpp"
#include "kgr/error.hpp"

using namespace kgr;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = KGR_FIXTURE_DIR;

ConfigTable table(const std::string& text) {
  std::istringstream in(text);
  return parse_config_table(in);
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("kgr_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kgreason");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("toml subset") {
    const auto t = table(
        "# c\ngraph = \"g.tsv\" # trailing\nseed = 7\n[kto]\nbeta = 0.5\n[reasoner]\nparse_retries = 0\n"
        "inverse = true\n");
    CHECK(std::get<std::string>(t.at("graph")) == "g.tsv");
    CHECK(std::get<std::int64_t>(t.at("seed")) == 7);
    CHECK(std::get<double>(t.at("kto.beta")) == 0.5);
    CHECK(std::get<bool>(t.at("reasoner.inverse")));
  }

  TEST_CASE("syntax errors carry a line number") {
    try {
      table("a = 1\nb = \n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(table("[unterminated\n"), ParseError);
    CHECK_THROWS_AS(table("a = 'single'\n"), ParseError);
  }

  TEST_CASE("typed config and path resolution") {
    const auto cfg = RunConfig::load(kFixture / "toy.toml");
    CHECK(cfg.graph == kFixture / "kg.tsv");
    CHECK(cfg.backend.rules == kFixture / "rules.jsonl");
    CHECK(cfg.seed == 7);
    CHECK(cfg.reasoner.seed == 7);
    CHECK(cfg.reasoner.model == "scripted-gpt");
    CHECK(cfg.reasoner.candidate_limit == 8);
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("invalid keys and values") {
    CHECK_THROWS_AS(RunConfig::from_table(table("bogus = 1\n"), "."), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_table(table("seed = \"x\"\n"), "."), ConfigError);
    CHECK_THROWS_AS(RunConfig::from_table(table("[backend]\nkind = \"carrier-pigeon\"\n"), "."),
                    ConfigError);
    auto cfg = RunConfig::load(kFixture / "toy.toml");
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig::load(kFixture / "toy.toml");
    cfg.backend.kind = BackendKind::kHttp;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(RunConfig::load(kFixture / "missing.toml"), ConfigError);
  }

  TEST_CASE("credentials come only from the environment") {
    CHECK_THROWS_AS(credential_from_env("KGR_TEST_UNSET_VARIABLE"), ConfigError);
    ::setenv("KGR_TEST_KEY", "sk-very-secret", 1);
    CHECK(credential_from_env("KGR_TEST_KEY") == "sk-very-secret");
    auto cfg = RunConfig::from_table(
        table("[backend]\nkind = \"http\"\nendpoint = \"http://localhost:1/v1\"\n"
              "api_key_env = \"KGR_TEST_KEY\"\n"),
        ".");
    const auto dump = cfg.to_json().dump();
    CHECK(dump.find("KGR_TEST_KEY") != std::string::npos);
    CHECK(dump.find("sk-very-secret") == std::string::npos);
    ::unsetenv("KGR_TEST_KEY");
  }
}

TEST_SUITE("cli") {
  TEST_CASE("unknown subcommand") {
    const auto r = cli({"frobnicate"});
    CHECK(r.code == kExitUsage);
    CHECK_FALSE(r.err.empty());
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("answer then eval on the toy dataset") {
    const auto dir = scratch("answer");
    const auto config = (kFixture / "toy.toml").string();
    auto r = cli({"answer", "-c", config, "-o", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(count_lines(dir / "traces.jsonl") == 3);
    CHECK(fs::exists(dir / "manifest_answer.json"));
    CHECK(r.out.find("traces.jsonl") != std::string::npos);

    r = cli({"eval", "-c", config, "-o", dir.string(), "--per-record"});
    REQUIRE(r.code == kExitOk);
    std::ifstream in(dir / "metrics.json");
    const auto metrics = nlohmann::json::parse(in);
    CHECK(metrics["hit"] == 1.0);
    CHECK(metrics["f1"] == 1.0);
    CHECK(count_lines(dir / "per_record.csv") == 4);

    std::ifstream mf(dir / "manifest_answer.json");
    const auto manifest = nlohmann::json::parse(mf);
    CHECK(manifest["command"] == "answer");
    CHECK(manifest["seed"] == 7);
    CHECK(manifest.contains("prompt_template_version"));
    fs::remove_all(dir);
  }

  TEST_CASE("extract and build-prefs write their artifacts") {
    const auto dir = scratch("extract");
    const auto config = (kFixture / "toy.toml").string();
    REQUIRE(cli({"extract", "-c", config, "-o", dir.string()}).code == kExitOk);
    CHECK(count_lines(dir / "weak_supervision.jsonl") == 4);
    CHECK(count_lines(dir / "sft.jsonl") > 0);
    REQUIRE(cli({"build-prefs", "-c", config, "-o", dir.string()}).code == kExitOk);
    CHECK(fs::exists(dir / "preferences.jsonl"));
    CHECK(fs::exists(dir / "preference_summary.json"));
    fs::remove_all(dir);
  }

  TEST_CASE("configuration errors leave no output behind") {
    const auto dir = scratch("bad");
    const auto bad = fs::temp_directory_path() / "kgr_bad_config.toml";
    {
      std::ofstream out(bad);
      out << "graph = \"nowhere.tsv\"\ndataset = \"nowhere.jsonl\"\noutput_dir = \"" << dir.string()
          << "\"\n[backend]\nrules = \"none.jsonl\"\n";
    }
    const auto r = cli({"answer", "-c", bad.string()});
    CHECK(r.code == kExitUsage);
    CHECK_FALSE(r.err.empty());
    CHECK_FALSE(fs::exists(dir));
    fs::remove(bad);
  }

  TEST_CASE("runtime failures exit with status 2") {
    const auto dir = scratch("runtime");
    const auto r = cli({"eval", "-c", (kFixture / "toy.toml").string(), "-o", dir.string(),
                        "--traces", (dir / "missing.jsonl").string()});
    CHECK(r.code == kExitRuntime);
    fs::remove_all(dir);
  }
}
