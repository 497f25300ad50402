#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "mmfc/cli.hpp"
#include "mmfc/jsonl.hpp"
#include "support.hpp"

using namespace mmfc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string native(const std::string& key) { return test::source_path("data/fixtures/native/" + key).string(); }

}  // namespace

TEST(Cli, HelpExitsZero) {
  auto r = invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("normalize"), std::string::npos);
  EXPECT_NE(r.out.find("anno"), std::string::npos);
  EXPECT_EQ(invoke({"train", "--help"}).code, 0);
}

TEST(Cli, UnknownFlagIsUsageError) {
  auto r = invoke({"normalize", "--bogus", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error: category=UsageError kind=UnknownArgument"), std::string::npos);
  EXPECT_NE(r.err.find("--dataset"), std::string::npos);  // subcommand usage follows
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
}

TEST(Cli, ErrorsMapToExitCodes) {
  test::TempDir dir;
  const auto runs = (dir / "runs").string();
  auto missing = invoke({"normalize", "--runs-dir", runs, "--dataset", "moc", "--input", (dir / "nope").string()});
  EXPECT_EQ(missing.code, 3);
  EXPECT_NE(missing.err.find("category=DataError kind=MissingDataset"), std::string::npos);

  auto unknown = invoke({"normalize", "--runs-dir", runs, "--dataset", "xyz", "--input", native("moc")});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("kind=UnknownDataset"), std::string::npos);

  auto no_data = invoke({"train", "--runs-dir", runs, "--members", "moc"});
  EXPECT_EQ(no_data.code, 2);
  EXPECT_NE(no_data.err.find("kind=InvalidConfig"), std::string::npos);

  auto backend = invoke({"train", "--runs-dir", runs, "--data", dir.path().string(), "--members", "moc",
                         "--backend", "clip-large"});
  EXPECT_EQ(backend.code, 4);
  EXPECT_NE(backend.err.find("category=BackendError"), std::string::npos);

  // One line per error.
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);
}

TEST(Cli, NormalizeWritesRunDirectory) {
  test::TempDir dir;
  const auto runs = (dir / "runs").string();
  const auto out_file = (dir / "data/moc.jsonl").string();
  auto r = invoke({"normalize", "--runs-dir", runs, "--dataset", "moc", "--input", native("moc"), "--output", out_file});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("normalized 180 moc examples (train 90, val 30, test 60)"), std::string::npos);
  auto xs = read_jsonl(out_file);
  EXPECT_EQ(xs.size(), 180u);

  std::vector<fs::path> run_dirs(fs::directory_iterator(runs), fs::directory_iterator{});
  ASSERT_EQ(run_dirs.size(), 1u);
  EXPECT_EQ(run_dirs[0].filename().string().size(), 16u);
  auto cfg = nlohmann::json::parse(test::slurp(run_dirs[0] / "config.json"));
  EXPECT_EQ(cfg["command"], "normalize");
  EXPECT_EQ(cfg["parameters"]["dataset"], "moc");
  EXPECT_FALSE(cfg["parameters"].contains("runs-dir"));
  EXPECT_EQ(test::slurp(run_dirs[0] / "moc.jsonl"), test::slurp(out_file));

  // Same parameters, same run id.
  auto again = invoke({"normalize", "--runs-dir", runs, "--dataset", "moc", "--input", native("moc")});
  ASSERT_EQ(again.code, 0);
  auto other = invoke({"normalize", "--runs-dir", runs, "--dataset", "moc", "--input", native("moc"), "--seed", "1"});
  ASSERT_EQ(other.code, 0);
  std::vector<fs::path> after(fs::directory_iterator(runs), fs::directory_iterator{});
  EXPECT_EQ(after.size(), 3u);  // --output is a parameter, --seed changes the id
}

TEST(Cli, ConfigReplayAndPrecedence) {
  test::TempDir dir;
  const auto runs = (dir / "runs").string();
  auto first = invoke({"normalize", "--runs-dir", runs, "--dataset", "fak", "--input", native("fak"), "--run-id", "orig"});
  ASSERT_EQ(first.code, 0) << first.err;
  const auto cfg = (fs::path(runs) / "orig/config.json").string();

  auto replay = invoke({"normalize", "--runs-dir", runs, "--config", cfg, "--run-id", "replay"});
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(test::slurp(fs::path(runs) / "orig/fak.jsonl"), test::slurp(fs::path(runs) / "replay/fak.jsonl"));
  auto a = nlohmann::json::parse(test::slurp(fs::path(runs) / "orig/config.json"));
  auto b = nlohmann::json::parse(test::slurp(fs::path(runs) / "replay/config.json"));
  EXPECT_EQ(a["parameters"], b["parameters"]);

  // A flag beats the config file.
  auto flagged = invoke({"normalize", "--runs-dir", runs, "--config", cfg, "--dataset", "ham", "--input", native("ham"),
                         "--run-id", "override"});
  ASSERT_EQ(flagged.code, 0) << flagged.err;
  EXPECT_TRUE(fs::exists(fs::path(runs) / "override/ham.jsonl"));

  test::spit(dir / "plain.json", R"({"dataset": "tox", "input": ")" + native("tox") + R"("})");
  auto plain = invoke({"normalize", "--runs-dir", runs, "--config", (dir / "plain.json").string(), "--run-id", "plain"});
  ASSERT_EQ(plain.code, 0) << plain.err;
  EXPECT_TRUE(fs::exists(fs::path(runs) / "plain/tox.jsonl"));
}

TEST(Cli, MixEnumerate) {
  test::TempDir dir;
  auto r = invoke({"mix", "--runs-dir", (dir / "runs").string(), "--enumerate", "3", "--pool", "fak,fv,moc,ngt,ph,vc",
                   "--output", (dir / "m.tsv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto tsv = test::slurp(dir / "m.tsv");
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 21);
  EXPECT_NE(tsv.find("FK + FV + MC\tfak,fv,moc\n"), std::string::npos);
}

TEST(Cli, AnnoOnFixture) {
  test::TempDir dir;
  auto r = invoke({"anno", "--runs-dir", (dir / "runs").string(), "--input",
                   test::source_path("data/fixtures/anno/annotations.tsv").string(), "--output",
                   (dir / "anno.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(test::slurp(dir / "anno.json"));
  EXPECT_EQ(j["generators"].size(), 2u);
  EXPECT_EQ(j["filter"]["question"], "Q6");
}

TEST(Cli, BinaryForwardsArguments) {
  auto r = test::shell(test::cli_path() + " normalize --bogus");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("error: category=UsageError"), std::string::npos);
  EXPECT_EQ(test::shell(test::cli_path() + " --help").code, 0);
}
