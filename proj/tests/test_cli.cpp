#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "hyperdt/commands.hpp"

namespace fs = std::filesystem;
using hyperdt::cli::run_command;
using hyperdt::io::parse_double;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hyperdt_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"generate", "--out", "/tmp/x.csv"}).code == 2);  // missing --seed
  CHECK(run({"train", "--seed", "1"}).code == 2);             // missing paths
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("missing input files exit with code 1") {
  TempDir tmp;
  const Run r = run({"train", "--data", tmp.file("absent.csv"), "--out",
                     tmp.file("m.txt"), "--seed", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("generate / train / evaluate pipeline") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv");
  const std::string model = tmp.file("m.txt");

  CHECK(run({"generate", "--out", data, "--classes", "2", "--n", "400",
             "--dim", "2", "--K", "-1", "--seed", "7", "--cluster-scale",
             "0.05"})
            .code == 0);
  CHECK(run({"train", "--data", data, "--out", model, "--seed", "1"}).code == 0);

  const Run ev = run({"evaluate", "--model", model, "--data", data});
  CHECK(ev.code == 0);
  // Tight clusters are separable at depth 3.
  CHECK(ev.out == "accuracy 1.000000\n");
}

TEST_CASE("predictions file is consistent with evaluate") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv");
  const std::string model = tmp.file("m.txt");
  const std::string preds = tmp.file("p.txt");

  REQUIRE(run({"generate", "--out", data, "--classes", "4", "--n", "300",
               "--seed", "3"})
              .code == 0);
  REQUIRE(run({"train", "--data", data, "--out", model, "--seed", "5"}).code ==
          0);
  REQUIRE(run({"predict", "--model", model, "--data", data, "--out", preds})
              .code == 0);

  std::ifstream pf(preds);
  std::ifstream df(data);
  std::string header;
  std::getline(df, header);
  std::size_t n = 0, correct = 0;
  std::string pline, dline;
  while (std::getline(pf, pline) && std::getline(df, dline)) {
    const std::string label = dline.substr(dline.rfind(',') + 1);
    correct += parse_double(pline) == parse_double(label);
    ++n;
  }
  CHECK(n == 300);

  const Run ev = run({"evaluate", "--model", model, "--data", data});
  char buf[64];
  std::snprintf(buf, sizeof buf, "accuracy %.6f\n",
                static_cast<double>(correct) / n);
  CHECK(ev.out == buf);
}

TEST_CASE("generate and train are deterministic") {
  TempDir tmp;
  for (int rep = 0; rep < 2; ++rep) {
    const std::string suffix = std::to_string(rep);
    REQUIRE(run({"generate", "--out", tmp.file("d" + suffix + ".csv"),
                 "--classes", "3", "--n", "200", "--seed", "9"})
                .code == 0);
    REQUIRE(run({"train", "--data", tmp.file("d" + suffix + ".csv"), "--out",
                 tmp.file("m" + suffix + ".txt"), "--n-trees", "8", "--seed",
                 "2"})
                .code == 0);
  }
  CHECK(slurp(tmp.file("d0.csv")) == slurp(tmp.file("d1.csv")));
  CHECK(slurp(tmp.file("m0.txt")) == slurp(tmp.file("m1.txt")));
}

TEST_CASE("train validates geometry and curvature against the header") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv");
  REQUIRE(run({"generate", "--out", data, "--seed", "1"}).code == 0);
  CHECK(run({"train", "--data", data, "--out", tmp.file("m.txt"), "--seed",
             "1", "--geometry", "klein"})
            .code == 1);
  CHECK(run({"train", "--data", data, "--out", tmp.file("m.txt"), "--seed",
             "1", "--K", "-2"})
            .code == 1);
  CHECK(run({"train", "--data", data, "--out", tmp.file("m.txt"), "--seed",
             "1", "--geometry", "hyperboloid", "--K", "-1"})
            .code == 0);
}

TEST_CASE("reference backend trains and matches the fast tree") {
  TempDir tmp;
  const std::string data = tmp.file("d.csv");
  REQUIRE(run({"generate", "--out", data, "--classes", "4", "--n", "250",
               "--seed", "21"})
              .code == 0);
  REQUIRE(run({"train", "--data", data, "--out", tmp.file("fast.txt"),
               "--seed", "1"})
              .code == 0);
  REQUIRE(run({"train", "--data", data, "--out", tmp.file("ref.txt"),
               "--backend", "reference", "--seed", "1"})
              .code == 0);
  const Run a = run({"evaluate", "--model", tmp.file("fast.txt"), "--data", data});
  const Run b = run({"evaluate", "--model", tmp.file("ref.txt"), "--data", data});
  CHECK(a.out == b.out);
  CHECK(run({"train", "--data", data, "--out", tmp.file("x.txt"), "--backend",
             "reference", "--n-trees", "4", "--seed", "1"})
            .code == 1);
}

TEST_CASE("klein and poincare datasets train end to end") {
  TempDir tmp;
  for (const std::string g : {"klein", "poincare"}) {
    const std::string data = tmp.file(g + ".csv");
    REQUIRE(run({"generate", "--out", data, "--geometry", g, "--classes", "3",
                 "--n", "150", "--seed", "4"})
                .code == 0);
    REQUIRE(run({"train", "--data", data, "--out", tmp.file(g + ".txt"),
                 "--seed", "1"})
                .code == 0);
    const Run ev = run({"evaluate", "--model", tmp.file(g + ".txt"), "--data",
                        data});
    CHECK(ev.code == 0);
    CHECK(ev.out.rfind("accuracy ", 0) == 0);
  }
}

TEST_CASE("compare emits the fixed report schema") {
  TempDir tmp;
  const std::string report = tmp.file("report.csv");
  const Run r = run({"compare", "--seeds", "3", "--seed", "5", "--n", "200",
                     "--out", report});
  CHECK(r.code == 0);
  std::ifstream is(report);
  std::string header;
  std::getline(is, header);
  CHECK(header == "seed,nodes,exact,tie_equiv,mismatch,train_agree,test_agree");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("bench writes one row per backend and size") {
  TempDir tmp;
  const std::string csv = tmp.file("bench.csv");
  const Run r = run({"bench", "--n-list", "64,128", "--repeats", "1", "--out",
                     csv});
  CHECK(r.code == 0);
  std::ifstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header == "backend,n,seconds");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);
}
