#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "doctest.h"

#include "polyfilter/dataset.hpp"
#include "polyfilter/experiments.hpp"
#include "test_support.hpp"

using namespace polyfilter;
using test_support::read_file;
using test_support::TempDir;

namespace {

int run_cli(const std::string& args, const std::filesystem::path& log) {
  const std::string cmd = "POLYFILTER_DATA_DIR='" POLYFILTER_FIXTURE_DIR "' POLYFILTER_THREADS=2 '" POLYFILTER_CLI_PATH
                          "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("train on toy2 succeeds and writes the summary schema") {
  TempDir out("cli-toy2");
  CHECK(run_cli("train --dataset toy2 --family laguerre --epochs 20 --out '" + out.path().string() + "'",
                out.path() / "stdout.txt") == 0);
  const auto summary = lines(read_file(out.path() / "summary.csv"));
  REQUIRE(summary.size() == 2);
  CHECK(summary[0] == kSummaryHeader);
  CHECK(split(summary[1]).size() == split(summary[0]).size());
  CHECK(split(summary[1])[0] == "toy2");
  const auto log = lines(read_file(out.path() / "log.csv"));
  CHECK(log.front() == kEpochLogHeader);
  CHECK(log.size() == 21);
  CHECK(std::filesystem::exists(out.path() / "model.json"));
  CHECK(std::filesystem::exists(out.path() / "learned_params.txt"));
}

TEST_CASE("train reaches full accuracy on the separable toy graph") {
  TempDir out("cli-toy4");
  CHECK(run_cli("train --dataset toy4 --family laguerre --epochs 50 --out '" + out.path().string() + "'",
                out.path() / "stdout.txt") == 0);
  const auto row = split(lines(read_file(out.path() / "summary.csv"))[1]);
  CHECK(std::stod(row[5]) == 1.0);
  CHECK(std::stod(row[6]) == 0.0);
  CHECK_FALSE(row[7].empty());  // alpha_layer1
  CHECK(row[9].empty());        // beta_layer1 does not apply
}

TEST_CASE("train is deterministic given the seed") {
  TempDir a("cli-det-a"), b("cli-det-b");
  const std::string flags = "train --dataset toy4 --family meixner --epochs 15 --seed 3 --out ";
  REQUIRE(run_cli(flags + "'" + a.path().string() + "'", a.path() / "stdout.txt") == 0);
  REQUIRE(run_cli(flags + "'" + b.path().string() + "'", b.path() / "stdout.txt") == 0);
  for (const char* f : {"summary.csv", "log.csv", "model.json"}) CHECK(read_file(a.path() / f) == read_file(b.path() / f));
}

TEST_CASE("fold datasets write one log per fold") {
  TempDir data("cli-folds-data"), out("cli-folds-out");
  DatasetBundle b = load_dataset(test_support::fixture_dir("toy4"));
  b.split = Folds{std::vector<SplitMasks>(kNumFolds, std::get<SingleSplit>(b.split).masks)};
  write_dataset(b, data.path() / "toy4f");
  REQUIRE(run_cli("train --dataset '" + (data.path() / "toy4f").string() + "' --epochs 5 --out '" +
                      out.path().string() + "'",
                  out.path() / "stdout.txt") == 0);
  for (std::size_t i = 0; i < kNumFolds; ++i) CHECK(std::filesystem::exists(out.path() / ("log_fold" + std::to_string(i) + ".csv")));
  CHECK(lines(read_file(out.path() / "summary.csv")).size() == 2);
}

TEST_CASE("ablation subcommands emit their schemas") {
  TempDir out("cli-ablate");
  REQUIRE(run_cli("ablate-k --dataset toy4 --ks 2 --epochs 5 --out '" + out.path().string() + "'",
                  out.path() / "k.txt") == 0);
  auto k = lines(read_file(out.path() / "ablate_k.csv"));
  REQUIRE(k.size() == 2);
  CHECK(k[0] == kAblateKHeader);
  CHECK(k[1].rfind("2,laguerre,", 0) == 0);

  REQUIRE(run_cli("ablate-k --dataset toy4 --ks 2,3 --family laguerre,chebyshev --epochs 5 --out '" +
                      out.path().string() + "'",
                  out.path() / "k2.txt") == 0);
  CHECK(lines(read_file(out.path() / "ablate_k.csv")).size() == 5);

  REQUIRE(run_cli("ablate-h --dataset toy4 --hs 16 --epochs 5 --out '" + out.path().string() + "'",
                  out.path() / "h.txt") == 0);
  const auto h = lines(read_file(out.path() / "ablate_h.csv"));
  REQUIRE(h.size() == 2);
  CHECK(h[0] == "h,family,acc");
  CHECK(h[1].rfind("16,laguerre,", 0) == 0);
}

TEST_CASE("report-alpha writes one row per dataset") {
  TempDir out("cli-alpha");
  REQUIRE(run_cli("report-alpha --datasets toy4,toy2 --epochs 10 --out '" + out.path().string() + "'",
                  out.path() / "stdout.txt") == 0);
  const auto rows = lines(read_file(out.path() / "alpha.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == kAlphaHeader);
  CHECK(split(rows[1])[0] == "toy4");
  CHECK(split(rows[2])[0] == "toy2");
  CHECK(rows[1] != rows[2]);
}

TEST_CASE("exit codes") {
  TempDir out("cli-exit");
  const auto log = out.path() / "stdout.txt";
  CHECK(run_cli("train --dataset no-such-dataset --out '" + out.path().string() + "'", log) == 1);
  CHECK(read_file(log).find("no-such-dataset") != std::string::npos);
  CHECK(run_cli("train --dataset toy4 --lr 1e300 --epochs 5 --out '" + out.path().string() + "'", log) == 2);
  CHECK(run_cli("selftest", log) == 0);
  CHECK(read_file(log).find("selftest passed") != std::string::npos);
  CHECK(run_cli("selftest --inject-fault", log) == 3);
  CHECK(run_cli("train --dataset toy4 --family hermite", log) != 0);
}
