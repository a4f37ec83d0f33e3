#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "randbat/bitseq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const char* cli = std::getenv("RANDBAT_CLI");
  REQUIRE(cli != nullptr);
  std::string cmd = std::string(cli) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) res.output += buf.data();
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "randbat_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("generate writes ascii01 trials and a sidecar") {
  auto out = work_dir() / "gen1";
  fs::remove_all(out);
  auto res = run_cli("generate --kind biased --p0 0.52 --trials 4 --shots 512 --seed 7 --out " +
                     out.string());
  CHECK(res.exit_code == 0);
  auto data = out / "biased_p0=0.52_seed=7.txt";
  REQUIRE(fs::exists(data));
  auto ts = randbat::load_trials(data, randbat::BitFileFormat::Ascii01);
  CHECK(ts.trials.size() == 4);
  CHECK(ts.trials[0].size() == 512);
  REQUIRE(fs::exists(out / "biased_p0=0.52_seed=7.meta.json"));
  json meta = json::parse(read_file(out / "biased_p0=0.52_seed=7.meta.json"));
  CHECK(meta["spec"]["kind"] == "biased");
  CHECK(meta["trials"] == 4);
  CHECK(meta.contains("generated_at_unix"));
}

TEST_CASE("generate qrng_type3 emits four bits per shot") {
  auto out = work_dir() / "gen3";
  fs::remove_all(out);
  auto res = run_cli("generate --kind qrng_type3 --trials 2 --shots 8192 --seed 1 --out " +
                     out.string() + " --label t3");
  CHECK(res.exit_code == 0);
  auto ts = randbat::load_trials(out / "t3.txt", randbat::BitFileFormat::Ascii01);
  CHECK(ts.trials[0].size() == 32768);
}

TEST_CASE("generate rejects out-of-range p0 with exit 2") {
  auto res = run_cli("generate --kind biased --p0 1.5 --trials 1 --out " +
                     (work_dir() / "bad").string());
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("p0 out of range") != std::string::npos);
}

TEST_CASE("test subcommand: all-zeros monobit exits 1") {
  auto file = work_dir() / "zeros.txt";
  {
    std::ofstream f(file);
    f << std::string(8192, '0') << '\n';
  }
  auto res = run_cli("test --file " + file.string() + " --tests 1");
  CHECK(res.exit_code == 1);
  CHECK(res.output.find("SNR") != std::string::npos);
}

TEST_CASE("test subcommand: tbt on a bad length exits 2") {
  auto file = work_dir() / "bad_len.txt";
  {
    std::ofstream f(file);
    f << std::string(10000, '0') << '\n';
  }
  auto res = run_cli("test --file " + file.string() + " --tests 18");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("length not multiple of 2048") != std::string::npos);
}

TEST_CASE("test subcommand emits per-(i,s) lhs arrays for test 16") {
  auto out = work_dir() / "gen16";
  fs::remove_all(out);
  run_cli("generate --kind ideal_qrng --trials 2 --shots 8192 --seed 3 --out " + out.string() +
          " --label ideal");
  auto json_path = work_dir() / "t16.json";
  auto res = run_cli("test --file " + (out / "ideal.txt").string() + " --tests 16 --out " +
                     json_path.string());
  CHECK(res.exit_code == 0);
  json doc = json::parse(read_file(json_path));
  REQUIRE(doc["combined"].size() == 1);
  auto& per_i = doc["combined"][0]["per_i"];
  REQUIRE(per_i.size() >= 3);
  CHECK(per_i[0]["lhs"].size() == 2);
  CHECK(per_i[1]["lhs"].size() == 4);
  CHECK(per_i[2]["lhs"].size() == 8);
  for (auto& trial : doc["trials"]) CHECK(trial["outcomes"][0].contains("per_i"));
}

TEST_CASE("battery: subsets, reruns, reports") {
  auto out1 = work_dir() / "bat1";
  auto out2 = work_dir() / "bat2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  std::string sources = "--source kind=biased,p0=0.52,seed=7 --source kind=ideal_qrng,seed=7";
  auto res1 = run_cli("battery " + sources + " --trials 8 --shots 8192 --tests 1,3,18 --out " +
                      out1.string());
  // the biased source is SNR, so the battery exits 1
  CHECK(res1.exit_code == 1);
  auto res2 = run_cli("battery " + sources + " --trials 8 --shots 8192 --tests 1,3,18 --out " +
                      out2.string());
  CHECK(res2.exit_code == 1);

  auto rep1 = out1 / "biased_p0=0.52_seed=7.report.json";
  auto rep2 = out2 / "biased_p0=0.52_seed=7.report.json";
  REQUIRE(fs::exists(rep1));
  REQUIRE(fs::exists(rep2));
  CHECK(read_file(rep1) == read_file(rep2));  // byte-identical rerun
  REQUIRE(fs::exists(out1 / "manifest.json"));
  CHECK(read_file(out1 / "manifest.json") == read_file(out2 / "manifest.json"));

  // grid has exactly the three configured columns
  auto grid = read_file(out1 / "summary_grid.txt");
  CHECK(grid.find("  1  3 18 |") != std::string::npos);

  json rep = json::parse(read_file(rep1));
  CHECK(rep["cells"].size() == 3);
  CHECK(rep["overall"] == "SNR");
}

TEST_CASE("battery defaults to the five comparison systems") {
  auto dir = work_dir() / "bat5";
  fs::remove_all(dir);
  auto res = run_cli("battery --trials 4 --shots 8192 --seed 9 --tests 1,16 --out " +
                     dir.string());
  CHECK(res.exit_code == 1);  // the biased system is SNR
  auto grid = read_file(dir / "summary_grid.txt");
  for (const char* label : {"pi_binary", "mt19937_seed=9", "os_csprng", "biased_p0=0.52_seed=9",
                            "biased_two_step_p0=0.52_seed=9"}) {
    INFO(label);
    CHECK(grid.find(label) != std::string::npos);
  }
  json manifest = json::parse(read_file(dir / "manifest.json"));
  CHECK(manifest["sources"].size() == 5);
  CHECK(manifest["tool_version"] == "0.1.0");
}

TEST_CASE("battery from a trial file") {
  auto dir = work_dir() / "batfile";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto file = dir / "mydata.txt";
  {
    std::ofstream f(file);
    for (int t = 0; t < 8; ++t) f << std::string(8192, t % 2 ? '1' : '0') << '\n';
  }
  auto res = run_cli("battery --source file=" + file.string() + " --tests 1 --out " +
                     (dir / "out").string());
  CHECK(res.exit_code == 1);
  REQUIRE(fs::exists(dir / "out" / "mydata.report.json"));
  json rep = json::parse(read_file(dir / "out" / "mydata.report.json"));
  CHECK(rep["cells"][0]["color"] == "B");  // fails per-trial, balanced combined
}

TEST_CASE("battery config file with flag overrides") {
  auto dir = work_dir() / "batcfg";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto cfg = dir / "run.cfg";
  {
    std::ofstream f(cfg);
    f << "# comparison run\n";
    f << "trials = 4\n";
    f << "shots = 8192\n";
    f << "tests = 1,18\n";
    f << "output = " << (dir / "cfg_out").string() << "\n";
    f << "source = kind=ideal_qrng,seed=5\n";
  }
  auto res = run_cli("battery --config " + cfg.string() + " --tests 1");
  CHECK(res.exit_code == 0);
  json rep = json::parse(read_file(dir / "cfg_out" / "ideal_qrng_seed=5.report.json"));
  CHECK(rep["cells"].size() == 1);  // --tests flag overrode the config value
  CHECK(rep["trial_count"] == 4);
}

TEST_CASE("report renders and exports figure data") {
  auto dir = work_dir() / "rep";
  fs::remove_all(dir);
  run_cli("battery --source kind=ideal_qrng,seed=11 --trials 8 --shots 8192 --out " +
          dir.string());
  auto report_file = dir / "ideal_qrng_seed=11.report.json";
  REQUIRE(fs::exists(report_file));
  auto res = run_cli("report --report " + report_file.string() + " --export " +
                     (dir / "figs").string());
  CHECK(res.exit_code == 0);
  for (const char* name : {"trial_values.csv", "combined_pvalues.csv", "borel_lhs.csv",
                           "bayesian_lhs.csv", "tbt_counts.csv"}) {
    INFO(name);
    REQUIRE(fs::exists(dir / "figs" / name));
  }
  auto borel = read_file(dir / "figs" / "borel_lhs.csv");
  CHECK(borel.find("combined,-1,1,0,") != std::string::npos);
}

TEST_CASE("compare: identical and differing reports") {
  auto dir = work_dir() / "cmp";
  fs::remove_all(dir);
  run_cli("battery --source kind=ideal_qrng,seed=2 --source kind=biased,seed=2 --trials 8 "
          "--shots 8192 --out " + dir.string());
  auto a = dir / "ideal_qrng_seed=2.report.json";
  auto b = dir / "biased_p0=0.52_seed=2.report.json";
  auto same = run_cli("compare --a " + a.string() + " --b " + a.string());
  CHECK(same.exit_code == 0);
  CHECK(same.output.find("identical reports") != std::string::npos);
  auto diff = run_cli("compare --a " + a.string() + " --b " + b.string() + " --out " +
                      (dir / "diff.json").string());
  CHECK(diff.exit_code == 0);
  CHECK(diff.output.find("->") != std::string::npos);
  json dj = json::parse(read_file(dir / "diff.json"));
  CHECK(dj["identical"] == false);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("test --file /nonexistent/file.txt").exit_code == 2);
  CHECK(run_cli("generate --kind bogus --out /tmp/x").exit_code == 2);
  CHECK(run_cli("bogus_subcommand").exit_code == 2);
}
