#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hop/accounting.hpp"
#include "hop/dataset.hpp"
#include "hop/manifest.hpp"

using namespace hop;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + HOP_BIN + "\" " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("kv config parsing") {
  KvConfig cfg = parse_kv_text(
      "# a comment\n"
      "\n"
      "seed = 42\n"
      "  grid=24  \n"
      "label = two words\n");
  REQUIRE(cfg.entries.size() == 3);
  CHECK(cfg.entries[0].first == "seed");
  CHECK(cfg.entries[1].first == "grid");
  CHECK(cfg.get_str("label", "") == "two words");
  CHECK(cfg.get_int("grid", 0) == 24);
  CHECK(cfg.get_int("missing", -3) == -3);
  CHECK(cfg.has("seed"));
  CHECK_FALSE(cfg.has("missing"));

  // upsert rewrites in place, keeping file order
  cfg.set("grid", "12");
  CHECK(cfg.entries[1].second == "12");
  cfg.set("extra", "1");
  CHECK(cfg.entries.back().first == "extra");

  CHECK_THROWS(parse_kv_text("a = 1\na = 2\n"));
  CHECK_THROWS(parse_kv_text("justaword\n"));
  CHECK_THROWS(parse_kv_text("= nokey\n"));
  try {
    parse_kv_text("ok = 1\nbroken line\n");
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("kv config typed getters") {
  KvConfig cfg = parse_kv_text(
      "i = 7\n"
      "u = 18446744073709551615\n"
      "f = 2.5e-3\n"
      "t = true\n"
      "n = 0\n"
      "junk = 7x\n");
  CHECK(cfg.get_int("i", 0) == 7);
  CHECK(cfg.get_u64("u", 0) == 18446744073709551615ull);
  CHECK(cfg.get_double("f", 0) == 2.5e-3);
  CHECK(cfg.get_bool("t", false));
  CHECK_FALSE(cfg.get_bool("n", true));
  CHECK(cfg.get_bool("missing", true));
  CHECK_THROWS(cfg.get_int("junk", 0));
  CHECK_THROWS(cfg.get_double("junk", 0));
  CHECK_THROWS(cfg.get_bool("i", false));

  try {
    cfg.require_known({"i", "u", "f", "t", "n"});
    CHECK(false);
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("junk") != std::string::npos);
  }
  CHECK_NOTHROW(cfg.require_known({"i", "u", "f", "t", "n", "junk"}));
}

TEST_CASE("kv text round-trips") {
  KvConfig cfg;
  cfg.set("alpha", "1");
  cfg.set("beta", "two words");
  cfg.set("gamma", "3.5");
  KvConfig back = parse_kv_text(kv_to_text(cfg));
  REQUIRE(back.entries.size() == cfg.entries.size());
  for (size_t i = 0; i < cfg.entries.size(); i++) {
    CHECK(back.entries[i].first == cfg.entries[i].first);
    CHECK(back.entries[i].second == cfg.entries[i].second);
  }
}

TEST_CASE("manifests survive a save/load cycle") {
  RunManifest m;
  m.command = "gen-data";
  m.master_seed = 9007199254740993ull;  // not representable as a double
  m.config.set("seed", "9007199254740993");
  m.config.set("count", "100");
  m.artifacts = {"dataset.jsonl"};

  const fs::path path = fs::temp_directory_path() / "hop_test_manifest.json";
  save_manifest(path.string(), m);
  RunManifest r = load_manifest(path.string());
  CHECK(r.version == kToolVersion);
  CHECK(r.command == "gen-data");
  CHECK(r.master_seed == 9007199254740993ull);
  REQUIRE(r.config.entries.size() == 2);
  CHECK(r.config.entries[0].first == "seed");
  CHECK(r.config.entries[1].first == "count");
  CHECK(r.artifacts == std::vector<std::string>{"dataset.jsonl"});
  fs::remove(path);

  CHECK_THROWS(load_manifest((fs::temp_directory_path() / "hop_no_manifest.json").string()));
  {
    std::ofstream out(path);
    out << "not json";
  }
  CHECK_THROWS(load_manifest(path.string()));
  fs::remove(path);
}

TEST_CASE("cli round-trip: gen-data, rerun, bench-cost, grad-check") {
  const fs::path dir_a = fresh_dir("hop_cli_gen_a");
  const fs::path dir_b = fresh_dir("hop_cli_gen_b");

  REQUIRE(run_cli("gen-data --out " + dir_a.string() +
                  " --seed 5 --set count=6 --set grid=8") == 0);
  REQUIRE(fs::exists(dir_a / "manifest.json"));
  REQUIRE(fs::exists(dir_a / "dataset.jsonl"));

  RunManifest m = load_manifest((dir_a / "manifest.json").string());
  CHECK(m.command == "gen-data");
  CHECK(m.master_seed == 5);
  CHECK(m.config.get_int("count", 0) == 6);
  CHECK(m.config.get_int("grid", 0) == 8);
  CHECK(m.artifacts == std::vector<std::string>{"dataset.jsonl"});
  CHECK(load_dataset((dir_a / "dataset.jsonl").string()).size() == 6);

  REQUIRE(run_cli("rerun " + (dir_a / "manifest.json").string() + " --out " + dir_b.string()) ==
          0);
  CHECK(slurp(dir_a / "dataset.jsonl") == slurp(dir_b / "dataset.jsonl"));
  CHECK(slurp(dir_a / "manifest.json") == slurp(dir_b / "manifest.json"));

  const fs::path dir_c = fresh_dir("hop_cli_bench");
  REQUIRE(run_cli("bench-cost --out " + dir_c.string()) == 0);
  CHECK(slurp(dir_c / "cost_table.csv") == cost_table_csv(DimConfig{}));

  const fs::path dir_d = fresh_dir("hop_cli_grad");
  REQUIRE(run_cli("grad-check --out " + dir_d.string() + " --scope attention --seeds 1") == 0);
  const std::string report = slurp(dir_d / "grad_report.csv");
  CHECK(report.rfind("scope,seed,max_rel,max_abs\nattention,1,", 0) == 0);

  // unknown keys and missing manifests fail loudly
  CHECK(run_cli("gen-data --out " + dir_a.string() + " --set bogus=1") != 0);
  CHECK(run_cli("rerun " + (dir_a / "no_such_manifest.json").string() + " --out " +
                dir_b.string()) != 0);

  for (const fs::path& d : {dir_a, dir_b, dir_c, dir_d}) fs::remove_all(d);
}
