#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "klish/cli.hpp"
#include "klish/io.hpp"
#include "klish/serialize.hpp"
#include "oracles.hpp"

namespace klish {
namespace {

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto r = invoke({"-q", "synth", "--kind", "fig2", "-n", "300", "--seed", "2", "--out", dir_.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  testing::TempDir dir_;
};

TEST_F(Cli, EvalOfGroundtruthAgainstItself) {
  const auto r = invoke({"-q", "eval", "--gt", path("labels.npy"), "--pred", path("labels.npy")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("ami").get<double>(), 1.0);
  EXPECT_EQ(j.at("ari").get<double>(), 1.0);
  EXPECT_EQ(j.at("miou").get<double>(), 1.0);
  EXPECT_EQ(j.begin().key(), "ami");
}

TEST_F(Cli, ClusterSelectPredictEval) {
  const std::vector<std::string> cluster{"-q", "cluster", "--input", path("features.npy"), "--k0", "12",
                                         "--seed", "1", "--threads", "1", "--out", path("h.json")};
  ASSERT_EQ(invoke(cluster).code, 0);
  const auto sel = invoke({"-q", "select", "--history", path("h.json"), "--k", "3", "--out", path("c.json")});
  ASSERT_EQ(sel.code, 0) << sel.err;
  const auto c = io::load_classifier(path("c.json"));
  EXPECT_EQ(c.clusters(), 3);
  EXPECT_EQ(c.dim(), 2);
  ASSERT_EQ(invoke({"-q", "predict", "--classifier", path("c.json"), "--input", path("features.npy"), "--out",
                    path("p.npy")})
                .code,
            0);
  const auto r = invoke({"-q", "eval", "--gt", path("labels.npy"), "--pred", path("p.npy")});
  ASSERT_EQ(r.code, 0);
  EXPECT_GE(Json::parse(r.out).at("ari").get<double>(), 0.95);
}

TEST_F(Cli, ClusterOutputIsByteIdenticalAcrossThreads) {
  std::string first;
  for (const char* t : {"1", "3"}) {
    const std::string out = path(std::string("h") + t + ".json");
    ASSERT_EQ(invoke({"-q", "cluster", "--input", path("features.npy"), "--k0", "10", "--seed", "5", "--threads", t,
                      "--out", out})
                  .code,
              0);
    if (first.empty()) first = slurp(out);
    else EXPECT_EQ(slurp(out), first);
  }
  EXPECT_FALSE(first.empty());
}

TEST_F(Cli, SeedFlagBeatsEnvironment) {
  const auto run_with = [&](const std::string& name, std::vector<std::string> extra) {
    std::vector<std::string> args{"-q", "baseline", "--method", "kmeans", "--input", path("features.npy"), "--k", "6",
                                  "--out", path(name)};
    args.insert(args.end(), extra.begin(), extra.end());
    EXPECT_EQ(invoke(args).code, 0);
    return slurp(path(name));
  };
  ::setenv("KLISH_SEED", "11", 1);
  const auto from_env = run_with("env.npy", {});
  const auto flag_same = run_with("flag11.npy", {"--seed", "11"});
  ::setenv("KLISH_SEED", "999", 1);
  const auto flag_wins = run_with("flag_wins.npy", {"--seed", "11"});
  ::unsetenv("KLISH_SEED");
  EXPECT_EQ(from_env, flag_same);
  EXPECT_EQ(flag_wins, flag_same);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"-q", "cluster", "--input", path("features.npy")}).code, cli::kUsage);
  EXPECT_EQ(invoke({"--help"}).code, cli::kOk);
  EXPECT_EQ(invoke({"-q", "eval", "--gt", path("missing.npy"), "--pred", path("labels.npy")}).code, cli::kIo);
  EXPECT_EQ(invoke({"-q", "cluster", "--input", path("features.npy"), "--k0", "100000", "--out", path("x.json")}).code,
            cli::kIo);
  EXPECT_EQ(invoke({"-q", "select", "--history", path("missing.json"), "--out", path("c.json")}).code, cli::kUsage);
  EXPECT_EQ(invoke({"-q", "baseline", "--method", "magic", "--input", path("features.npy"), "--k", "2", "--out",
                    path("b.npy")})
                .code,
            cli::kUsage);
}

TEST_F(Cli, EvalWarnsOnCountMismatch) {
  ASSERT_EQ(invoke({"-q", "baseline", "--method", "kmeans", "--input", path("features.npy"), "--k", "5", "--seed", "0",
                    "--out", path("km.npy")})
                .code,
            0);
  const auto r = invoke({"eval", "--gt", path("labels.npy"), "--pred", path("km.npy")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("k").get<int>(), 5);
  EXPECT_EQ(j.at("m").get<int>(), 3);
  EXPECT_EQ(j.at("match_vector").size(), 5u);
}

}  // namespace
}  // namespace klish
