#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bottleneck/cli.hpp"
#include "bottleneck/closed_forms.hpp"
#include "bottleneck/io.hpp"
#include "json.hpp"

using namespace bottleneck;
namespace fs = std::filesystem;

namespace {

struct CliRun
{
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args)
{
  args.insert(args.begin(), "bottleneck_lab");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Minimal CSV reader; quoted fields may contain commas and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      row.push_back(field);
      field.clear();
      rows.push_back(row);
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

class TempDir
{
public:
  TempDir()
  {
    path_ = fs::temp_directory_path() / ("bottleneck_cli_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
  fs::path path_;
  static inline int counter_ = 0;
};

std::string slurp(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Io, ParsesBothInputForms)
{
  const auto a = parse_joint_json(R"({"p_xy": [[0.3, 0.2], [0.1, 0.4]]})");
  EXPECT_EQ(a.rows(), 2u);
  EXPECT_DOUBLE_EQ(a.at(1, 1), 0.4);
  const auto b = parse_joint_json(R"({"q": [0.25, 0.75], "T": [[0.9, 0.2], [0.1, 0.8]]})");
  EXPECT_NEAR(b.at(0, 0), 0.225, 1e-15);
  EXPECT_NEAR(b.at(1, 0), 0.15, 1e-15);
  EXPECT_NEAR(b.at(0, 1), 0.025, 1e-15);
  EXPECT_NEAR(b.at(1, 1), 0.6, 1e-15);
}

TEST(Io, RejectsMalformedInput)
{
  EXPECT_THROW(parse_joint_json("{"), std::invalid_argument);
  EXPECT_THROW(parse_joint_json("[1, 2]"), std::invalid_argument);
  EXPECT_THROW(parse_joint_json(R"({"q": [0.5, 0.5]})"), std::invalid_argument);
  EXPECT_THROW(parse_joint_json(R"({"p_xy": [[0.5, "a"], [0.25, 0.25]]})"), std::invalid_argument);
  EXPECT_THROW(parse_joint_json(R"({"p_xy": [[0.5, 0.6], [0.25, 0.25]]})"), std::invalid_argument);
  EXPECT_THROW(parse_joint_json(R"({"q": [0.5, 0.5], "T": [[1.0, 0.0, 0.0]]})"), std::invalid_argument);
}

TEST(Io, FormatDoubleRoundTrips)
{
  for (double v : {0.0, 0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.46899559358928117})
    EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Io, CsvFieldQuoting)
{
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Io, Fnv1aReferenceVectors)
{
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a64_hex("foobar"), "85944171f73967e8");
}

TEST(Io, AtomicWriteReplacesAndCleansUp)
{
  TempDir dir;
  const std::string path = dir.file("out.csv");
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  EXPECT_EQ(slurp(path), "second\n");
  EXPECT_FALSE(fs::exists(path + ".tmp"));
}

TEST(Cli, ExitCodesForBadInput)
{
  EXPECT_EQ(run({}).code, kExitInvalidInput);
  EXPECT_EQ(run({"curve"}).code, kExitInvalidInput);
  EXPECT_EQ(run({"curve", "--bsc", "0.1"}).code, kExitInvalidInput);
  EXPECT_EQ(run({"curve", "--bsc", "0.7,0.1"}).code, kExitInvalidInput);
  EXPECT_EQ(run({"curve", "--bsc", "0.1,0.1", "--problem", "nope"}).code, kExitInvalidInput);
  EXPECT_EQ(run({"curve", "--bsc", "0.1,0.1", "--problem", "arimoto", "--beta", "1.5"}).code,
            kExitInvalidInput);
  EXPECT_EQ(run({"curve", "--bsc", "0.1,0.1", "--beta", "3"}).code, kExitInvalidInput);
  EXPECT_EQ(run({"curve", "--input", "/nonexistent/joint.json"}).code, kExitInvalidInput);
  EXPECT_EQ(run({"closed-form", "--bsc", "0.1,0.1", "--law", "mgl", "--points", "1"}).code,
            kExitInvalidInput);
  EXPECT_EQ(run({"verify", "--suite", "bogus"}).code, kExitInvalidInput);
  const CliRun help = run({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("curve"), std::string::npos);
  EXPECT_EQ(run({"--version"}).out, std::string(kToolVersion) + "\n");
}

TEST(Cli, InfeasibleRequests)
{
  TempDir dir;
  const std::string five = dir.file("five.json");
  std::ofstream(five) << R"({"p_xy": [[0.1,0.1],[0.1,0.1],[0.1,0.1],[0.1,0.1],[0.1,0.1]]})";
  EXPECT_EQ(run({"curve", "--input", five}).code, kExitInfeasible);

  const std::string three = dir.file("three.json");
  std::ofstream(three) << R"({"p_xy": [[0.2,0.1],[0.1,0.2],[0.2,0.2]]})";
  const std::string out = dir.file("arimoto.csv");
  EXPECT_EQ(run({"curve", "--input", three, "--problem", "arimoto", "--output", out}).code,
            kExitInfeasible);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_FALSE(fs::exists(out + ".tmp"));
  EXPECT_FALSE(fs::exists(out + ".manifest.json"));
}

TEST(Cli, ThreadVariableValidated)
{
  ::setenv("BOTTLENECK_LAB_THREADS", "zero", 1);
  const int code = run({"closed-form", "--bsc", "0.1,0.1"}).code;
  ::unsetenv("BOTTLENECK_LAB_THREADS");
  EXPECT_EQ(code, kExitInvalidInput);
}

TEST(Cli, ClosedFormTables)
{
  const BscInstance inst(0.1, 0.1);
  const auto lower = parse_csv(run({"closed-form", "--bsc", "0.1,0.1", "--law", "mgl"}).out);
  const auto upper = parse_csv(run({"closed-form", "--bsc", "0.1,0.1", "--law", "mrgl"}).out);
  ASSERT_EQ(lower.size(), 102u);
  ASSERT_EQ(upper.size(), 102u);
  EXPECT_EQ(lower[0], (std::vector<std::string>{"q", "delta", "beta", "x", "lower", "upper"}));
  EXPECT_DOUBLE_EQ(std::stod(lower[1][3]), 0.0);
  EXPECT_NEAR(std::stod(lower[1][4]), binary_entropy(0.1), 1e-14);
  EXPECT_NEAR(std::stod(lower.back()[3]), binary_entropy(0.1), 1e-14);
  EXPECT_NEAR(std::stod(lower.back()[4]), binary_entropy(star(0.1, 0.1)), 1e-12);
  for (std::size_t r = 1; r < lower.size(); ++r) {
    EXPECT_EQ(lower[r][3], upper[r][3]);
    EXPECT_TRUE(lower[r][5].empty());
    EXPECT_TRUE(upper[r][4].empty());
    EXPECT_GE(std::stod(upper[r][5]), std::stod(lower[r][4]) - 1e-12);
  }

  const auto ar = parse_csv(run({"closed-form", "--bsc", "0.4,0.2", "--law", "arimoto-mgl", "--beta", "2",
                                 "--points", "2"})
                                .out);
  ASSERT_EQ(ar.size(), 3u);
  EXPECT_NEAR(std::stod(ar[1][3]), std::sqrt(0.16 + 0.36), 1e-15);
  EXPECT_NEAR(std::stod(ar[2][3]), 1.0, 0.0);
  EXPECT_NEAR(std::stod(ar[2][4]), std::sqrt(0.04 + 0.64), 1e-15);
}

TEST(Cli, CurveIsDeterministicAndWritesManifest)
{
  TempDir dir;
  const std::vector<std::string> base{"curve",        "--bsc",        "0.1,0.1", "--problem", "ib",
                                      "--resolution", "512",          "--lambda-steps", "32"};
  auto a_args = base;
  a_args.insert(a_args.end(), {"--output", dir.file("a.csv")});
  auto b_args = base;
  b_args.insert(b_args.end(), {"--output", dir.file("b.csv")});
  ASSERT_EQ(run(a_args).code, kExitOk);
  ::setenv("BOTTLENECK_LAB_THREADS", "3", 1);
  const int code = run(b_args).code;
  ::unsetenv("BOTTLENECK_LAB_THREADS");
  ASSERT_EQ(code, kExitOk);
  const std::string a = slurp(dir.file("a.csv"));
  EXPECT_EQ(a, slurp(dir.file("b.csv")));
  EXPECT_EQ(a, run(base).out);

  const auto manifest = nlohmann::json::parse(slurp(dir.file("a.csv.manifest.json")));
  EXPECT_EQ(manifest.at("command"), "curve");
  EXPECT_EQ(manifest.at("tool_version"), kToolVersion);
  EXPECT_EQ(manifest.at("input_digest").get<std::string>().size(), 16u);
  EXPECT_EQ(manifest.at("parameters").at("problem"), "ib");
  EXPECT_FALSE(fs::exists(dir.file("a.csv.tmp")));

  const auto rows = parse_csv(a);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"problem", "direction", "lambda", "x", "y", "trivial",
                                                "witness_json"}));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_EQ(rows[r][0], "ib");
    const auto w = nlohmann::json::parse(rows[r][6]);
    EXPECT_FALSE(w.at("atoms").empty());
    // Information frame, in bits: 0 <= I(Y;W) <= I(X;W) <= H(X).
    const double x = std::stod(rows[r][3]);
    const double y = std::stod(rows[r][4]);
    EXPECT_GE(y, -1e-12);
    EXPECT_LE(y, x + 1e-12);
    EXPECT_LE(x, binary_entropy(0.1) + 1e-12);
  }
}

TEST(Cli, ProductJointHasNoInformation)
{
  TempDir dir;
  const std::string path = dir.file("product.json");
  std::ofstream(path) << R"({"q": [0.3, 0.7], "T": [[0.4, 0.4], [0.6, 0.6]]})";
  const CliRun r = run({"curve", "--input", path, "--direction", "both", "--resolution", "256",
                     "--lambda-steps", "16"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_GT(rows.size(), 2u);
  for (std::size_t k = 1; k < rows.size(); ++k)
    EXPECT_NEAR(std::stod(rows[k][4]), 0.0, 1e-12);
}

TEST(Cli, OracleAgreesWithMgl)
{
  const CliRun r = run({"oracle", "--bsc", "0.1,0.1", "--kernel", "entropy", "--direction", "lower",
                     "--x", "0.1,0.25,0.4"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  const BscInstance inst(0.1, 0.1);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k][3], "1");
    EXPECT_NEAR(std::stod(rows[k][2]), mgl(inst, std::stod(rows[k][0])), 5e-3);
  }
}

TEST(Cli, VerifySingleSuite)
{
  const CliRun r = run({"verify", "--suite", "mgl"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out.rfind("A1 PASS", 0), 0u) << r.out;
}
