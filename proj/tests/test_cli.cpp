#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "del/cli.hpp"
#include "del/operators.hpp"
#include "del/report.hpp"

using namespace del;

namespace {

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("del_cli_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, EmptyArgsPrintsHelp) {
  const Result r = run({});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("experiment"), std::string::npos);
  EXPECT_NE(r.out.find("bellman"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({"bogus"}).code, cli::kUsage);
  EXPECT_EQ(run({"--mode", "fuzzy", "params"}).code, cli::kUsage);
  EXPECT_EQ(run({"experiment", "--suite", "nothing"}).code, cli::kUsage);
  EXPECT_EQ(run({"experiment", "--levels", "many"}).code, cli::kUsage);
  EXPECT_EQ(run({"bellman", "--check", "everything"}).code, cli::kUsage);
  EXPECT_EQ(run({"bellman", "--K", "-3"}).code, cli::kUsage);
  EXPECT_EQ(run({"--budget-intervals", "0", "params"}).code, cli::kUsage);
}

TEST(Cli, BudgetRejectedBeforeWork) {
  const Result r = run({"--mode", "exact", "experiment", "--k", "5", "--levels", "20"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("budget"), std::string::npos);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(run({"build-weight", "--k", "3", "--levels", "30", "--out", "/dev/null"}).code, cli::kUsage);
}

TEST(Cli, ParamsPrintsExactValues) {
  const auto dir = temp_dir();
  const Result r = run({"--json", (dir / "p.json").string(), "params", "--k-min", "2", "--k-max", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("19/7"), std::string::npos);
  EXPECT_NE(r.out.find("243/23"), std::string::npos);
  const Json j = Json::parse(slurp(dir / "p.json"));
  EXPECT_EQ(j["rows"][1]["p"], "243/23");
  EXPECT_EQ(j["rows"][1]["residual_1"], "0/1");
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(Cli, UnwritablePathIsIoError) {
  EXPECT_EQ(run({"--json", "/nonexistent-dir/p.json", "params", "--k", "2"}).code, cli::kIo);
  EXPECT_EQ(run({"build-weight", "--k", "2", "--levels", "1", "--out", "/nonexistent-dir/w.txt"}).code, cli::kIo);
  EXPECT_EQ(run({"apply", "--op", "a2", "--input", "/nonexistent-dir/w.txt"}).code, cli::kIo);
}

TEST(Cli, BuildAndApplyRoundTrip) {
  const auto dir = temp_dir();
  const auto w = dir / "w.txt";
  const auto s = dir / "s.txt";
  ASSERT_EQ(run({"build-weight", "--k", "2", "--levels", "3", "--out", w.string(), "--signs-out", s.string()}).code, 0);
  const Json side = Json::parse(slurp(dir / "w.txt.json"));
  EXPECT_EQ(side["params"]["p"], "19/7");
  EXPECT_EQ(side["average"], "1/1");
  EXPECT_EQ(side["average_inverse"], "19/7");
  EXPECT_TRUE(side["averages_match"].get<bool>());

  Result a2 = run({"apply", "--op", "a2", "--input", w.string()});
  EXPECT_EQ(a2.code, 0);
  EXPECT_EQ(a2.out, "a2\t31/7\n");
  Result avg = run({"apply", "--op", "average", "--input", w.string(), "--interval", "root"});
  EXPECT_EQ(avg.out, "average\t1/1\n");
  Result favg = run({"--mode", "float", "apply", "--op", "average", "--input", w.string()});
  EXPECT_NEAR(std::stod(favg.out.substr(8)), 1.0, 1e-12);

  const auto t = dir / "t.txt";
  EXPECT_EQ(run({"apply", "--op", "transform", "--input", w.string(), "--signs", s.string(), "--out", t.string()}).code,
            0);
  const auto tf = from_text<QuadraticSurd>(slurp(t));
  EXPECT_EQ(average(tf, DyadicInterval::root()), QuadraticSurd(0));
  EXPECT_EQ(run({"apply", "--op", "transform", "--input", w.string()}).code, cli::kUsage);
  EXPECT_EQ(run({"apply", "--op", "square", "--input", w.string(), "--convention", "odd"}).code, cli::kUsage);
  EXPECT_EQ(run({"apply", "--op", "nothing", "--input", w.string()}).code, cli::kUsage);
  EXPECT_EQ(run({"apply", "--op", "maximal", "--input", w.string(), "--interval", "10"}).code, 0);

  // M^d 1 = 1, so with M = 4 and two terms the series is 1 + 1/8 + 1/64 everywhere
  const auto r = dir / "r.txt";
  EXPECT_EQ(run({"apply", "--op", "rdf", "--weight", w.string(), "--terms", "2", "--m-norm", "4", "--out", r.string()})
                .code,
            0);
  const auto series = from_text<QuadraticSurd>(slurp(r));
  for (const auto& l : series.leaves()) EXPECT_EQ(l.value, QuadraticSurd(q(73, 64)));
  const auto ra = dir / "ra.txt";
  EXPECT_EQ(run({"apply", "--op", "rdf", "--weight", w.string(), "--g", w.string(), "--out", ra.string()}).code, 0);
  const auto rg = from_text<QuadraticSurd>(slurp(ra));
  const auto wf = from_text<QuadraticSurd>(slurp(w));
  for_each_common_cell(rg, wf, [](const DyadicInterval& c, const QuadraticSurd& a, const QuadraticSurd& b) {
    EXPECT_GE(a, b) << c.path();
  });
}

TEST(Cli, ExperimentWritesCsvAndJson) {
  const auto dir = temp_dir();
  const auto csv = dir / "e.csv";
  const auto json = dir / "e.json";
  const Result r = run({"--quiet", "--seed", "7", "--csv", csv.string(), "--json", json.string(), "experiment",
                        "--suite", "maximal,weak", "--k-min", "2", "--k-max", "3", "--levels", "2"});
  EXPECT_TRUE(r.code == 0 || r.code == 1);
  EXPECT_TRUE(r.out.empty());
  const std::string text = slurp(csv);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  const Json j = Json::parse(slurp(json));
  EXPECT_EQ(j["command"], "experiment");
  EXPECT_EQ(j["inputs"]["seed"], 7);
  EXPECT_EQ(j["reports"][1]["params"]["p"], "243/23");
  EXPECT_EQ(j["passed"].get<bool>(), r.code == 0);
  EXPECT_TRUE(j.contains("versions"));
  EXPECT_TRUE(j.contains("timestamp"));
}

TEST(Cli, ConfigFileWithOverrides) {
  const auto dir = temp_dir();
  const auto cfg = dir / "c.cfg";
  const auto json = dir / "c.json";
  write(cfg, "# sweep\nsuite = maximal\nk-min=2\nk-max=3\nlevels=1\nquiet=true\n");
  const Result r = run({"--json", json.string(), "experiment", "--config", cfg.string(), "--k-max", "2"});
  EXPECT_TRUE(r.code == 0 || r.code == 1) << r.err;
  const Json j = Json::parse(slurp(json));
  EXPECT_EQ(j["inputs"]["k_max"], 2);
  EXPECT_EQ(j["inputs"]["suites"], "maximal");
  EXPECT_EQ(j["reports"].size(), 1U);

  write(cfg, "suite=maximal\nunknown-key=3\n");
  EXPECT_EQ(run({"experiment", "--config", cfg.string()}).code, cli::kUsage);
  write(cfg, "no equals sign\n");
  EXPECT_EQ(run({"experiment", "--config", cfg.string()}).code, cli::kUsage);
  EXPECT_EQ(run({"experiment", "--config", (dir / "missing.cfg").string()}).code, cli::kIo);
}

TEST(Cli, ReadConfigParsesFlatFile) {
  const auto dir = temp_dir();
  write(dir / "r.cfg", "a=1\n  b = two words \n#c=3\n\n");
  const auto m = cli::read_config((dir / "r.cfg").string());
  ASSERT_EQ(m.size(), 2U);
  EXPECT_EQ(m.at("a"), "1");
  EXPECT_EQ(m.at("b"), "two words");
}

TEST(Cli, BellmanSubsetWithJson) {
  const auto dir = temp_dir();
  const auto json = dir / "b.json";
  const Result r = run({"--json", json.string(), "bellman", "--check", "main,growth", "--Q", "10", "--K", "1000",
                        "--samples", "2000", "--seed", "3"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const Json j = Json::parse(slurp(json));
  EXPECT_EQ(j["checks"]["main"]["violations"], 0);
  EXPECT_TRUE(j["checks"]["growth"]["pass"].get<bool>());
  EXPECT_EQ(j["inputs"]["K_value"], 1000.0);
}

TEST(Cli, BellmanObstacleFailureExitsOne) {
  EXPECT_EQ(run({"--quiet", "bellman", "--check", "obstacle", "--Q", "100", "--K", "100", "--a0", "0.01"}).code,
            cli::kCheckFailed);
}

TEST(Cli, BinaryRunsEndToEnd) {
  const std::string cmd = std::string(DEL_BINARY) + " params --k 3 > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}
