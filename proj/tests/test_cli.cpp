#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oblsamp/crypto.hpp"
#include "oblsamp/dataset.hpp"

using namespace oblsamp;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(OBLSAMP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof(buf), pipe)) {
    r.output.append(buf, got);
  }
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "oblsamp_cli_test";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gen-data writes a loadable dataset with keys covering [1,n]") {
  fs::path file = temp_dir() / "d.obls";
  CliResult r = run_cli("gen-data --n 20 --record-size 8 --seed ab12 --out " + file.string());
  CHECK(r.exit_code == 0);
  Dataset d = load_dataset(file);
  CHECK(d.n == 20);
  CHECK(d.record_size == 8);
}

TEST_CASE("swo subcommand writes k sample files plus a manifest") {
  fs::path dir = temp_dir();
  fs::path file = dir / "swo_in.obls";
  fs::path out = dir / "swo_out";
  fs::remove_all(out);
  REQUIRE(run_cli("gen-data --n 16 --record-size 8 --seed ab12 --out " + file.string())
              .exit_code == 0);
  CliResult r = run_cli("swo --input " + file.string() + " --m 4 --seed cd34 --out " +
                        out.string());
  CHECK(r.exit_code == 0);
  for (int i = 1; i <= 4; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%04d.bin", i);
    fs::path sample = out / name;
    REQUIRE(fs::exists(sample));
    CHECK(fs::file_size(sample) == 4 * record_ct_size(8));
  }
  std::ifstream manifest(out / "manifest.json");
  std::stringstream ss;
  ss << manifest.rdbuf();
  CHECK(ss.str().find("\"n\": 16") != std::string::npos);
  CHECK(ss.str().find("\"k\": 4") != std::string::npos);
}

TEST_CASE("poisson subcommand hides boundaries unless explicitly revealed") {
  fs::path dir = temp_dir();
  fs::path file = dir / "poi_in.obls";
  REQUIRE(run_cli("gen-data --n 16 --record-size 8 --seed ab12 --out " + file.string())
              .exit_code == 0);

  fs::path hidden = dir / "poi_hidden";
  fs::remove_all(hidden);
  CliResult r1 = run_cli("poisson --input " + file.string() +
                         " --gamma 0.25 --k 4 --seed cd34 --out " + hidden.string());
  CHECK(r1.exit_code == 0);
  CHECK(fs::exists(hidden / "samples.bin"));
  CHECK(fs::file_size(hidden / "samples.bin") == 16 * SlotLayout{8, 1}.slot_bytes());
  CHECK_FALSE(fs::exists(hidden / "private_meta.json"));

  fs::path revealed = dir / "poi_revealed";
  fs::remove_all(revealed);
  CliResult r2 = run_cli("poisson --input " + file.string() +
                         " --gamma 0.25 --k 4 --seed cd34 --out " + revealed.string() +
                         " --unsafe-reveal-boundaries");
  CHECK(r2.exit_code == 0);
  CHECK(fs::exists(revealed / "private_meta.json"));
}

TEST_CASE("trace file is canonical TSV with LF endings and a fixed length") {
  fs::path dir = temp_dir();
  fs::path file = dir / "trace_in.obls";
  fs::path trace = dir / "run.trace";
  REQUIRE(run_cli("gen-data --n 16 --record-size 8 --seed ab12 --out " + file.string())
              .exit_code == 0);
  CliResult r = run_cli("swo --input " + file.string() + " --m 4 --seed cd34 --out " +
                        (dir / "trace_out").string() + " --trace " + trace.string());
  REQUIRE(r.exit_code == 0);
  std::ifstream in(trace, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CHECK(text.rfind("dataset\twrite\t0\n", 0) == 0);  // ingest comes first
  CHECK(text.find("\r") == std::string::npos);
  // ingest n + two trivial shuffles (2n each) + scan (2n+2) + grouping (2n)
  const std::size_t lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == 16 + 3 * (2 * 16) + (2 * 16 + 2));
}

TEST_CASE("shuffle baseline splits the shuffled array into public batches") {
  fs::path dir = temp_dir();
  fs::path out = dir / "batches";
  fs::remove_all(out);
  CliResult r = run_cli("shuffle --n 16 --m 4 --seed 7e7e --out " + out.string());
  CHECK(r.exit_code == 0);
  for (int i = 1; i <= 4; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "batch_%04d.bin", i);
    REQUIRE(fs::exists(out / name));
    CHECK(fs::file_size(out / name) == 4 * record_ct_size(16));
  }
  CHECK(run_cli("shuffle --n 16 --m 5 --seed 7e7e --out " + out.string()).exit_code == 3);
}

TEST_CASE("budget prints six-significant-digit totals") {
  CliResult r = run_cli(
      "budget --mechanism swo --eps 1 --delta 1e-6 --n 60000 --m 600 --T 100 "
      "--delta2 1e-6");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("epsilon_total = 0.924821") != std::string::npos);
  CHECK(r.output.find("delta_total = 2e-06") != std::string::npos);
  CHECK(r.output.find("epsilon_amplified = 0.0170369") != std::string::npos);
}

TEST_CASE("budget shuffle row passes through per-step parameters at E=1") {
  CliResult r = run_cli(
      "budget --mechanism shuffle --eps 0.5 --delta 1e-5 --n 60000 --m 600 --T 100");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("epsilon_total = 0.5") != std::string::npos);
  CHECK(r.output.find("delta_total = 1e-05") != std::string::npos);
}

TEST_CASE("audit trace subcommand reports success on a clean configuration") {
  CliResult r = run_cli("audit trace --algorithm swo --n 32 --m 8 --runs 3 --json");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"trace_equal\": true") != std::string::npos);
}

TEST_CASE("audit subcommands capture the first run's trace on request") {
  fs::path trace = temp_dir() / "audit.trace";
  fs::remove(trace);
  CliResult r = run_cli("audit trace --algorithm swo --n 32 --m 8 --runs 2 --trace " +
                        trace.string());
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(trace));
  std::ifstream in(trace);
  std::string first;
  std::getline(in, first);
  CHECK(first == "dataset\twrite\t0");
}

TEST_CASE("configuration errors exit with code 3") {
  CHECK(run_cli("audit trace --algorithm swo --n 32 --m 5 --runs 3").exit_code == 3);
  CHECK(run_cli("budget --mechanism bogus --eps 1 --delta 1e-6").exit_code == 3);
  CHECK(run_cli("swo --input /nonexistent.obls --m 4 --out /tmp/x").exit_code == 3);
  CHECK(run_cli("nonsense").exit_code == 3);
  CHECK(run_cli("audit cost --algorithm shuffle --n-list 12,abc").exit_code == 3);

  fs::path file = temp_dir() / "sizes_in.obls";
  REQUIRE(run_cli("gen-data --n 6 --record-size 4 --seed 99 --out " + file.string())
              .exit_code == 0);
  CHECK(run_cli("swo --input " + file.string() + " --sizes 1,2,x --out /tmp/x")
            .exit_code == 3);
  CHECK(run_cli("swo --input " + file.string() + " --sizes 1,2,4 --out /tmp/x")
            .exit_code == 3);  // sizes must sum to n
}
