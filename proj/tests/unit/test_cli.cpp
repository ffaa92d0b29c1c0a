#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "mcse_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(MCSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string dir(const std::string& name) { return (kRoot / name).string(); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { fs::remove_all(kRoot); }
};

}  // namespace

TEST_F(Cli, SimulateIsByteIdenticalForOneSeed) {
  const std::string args = "simulate --agent softmax --sigma 30,60,0.2 --lambda 2 --n 6 --resolution 10 --seed 7";
  ASSERT_EQ(run(args + " --out " + dir("a")), 0);
  ASSERT_EQ(run(args + " --out " + dir("b")), 0);
  for (const char* f : {"observations.csv", "states.jsonl", "truth.json"}) {
    EXPECT_FALSE(slurp(kRoot / "a" / f).empty()) << f;
    EXPECT_EQ(slurp(kRoot / "a" / f), slurp(kRoot / "b" / f)) << f;
  }
  ASSERT_EQ(run("simulate --agent softmax --sigma 30,60,0.2 --lambda 2 --n 6 --resolution 10 --seed 8 --out " + dir("c")), 0);
  EXPECT_NE(slurp(kRoot / "a" / "observations.csv"), slurp(kRoot / "c" / "observations.csv"));
}

TEST_F(Cli, EstimateIsByteIdenticalAndWritesJd) {
  ASSERT_EQ(run("simulate --agent rational --sigma 40,40,0 --n 5 --resolution 10 --seed 3 --out " + dir("s")), 0);
  const std::string obs = (kRoot / "s" / "observations.csv").string();
  for (const char* out : {"e1", "e2"}) {
    ASSERT_EQ(run("estimate --obs " + obs + " --method mcse --m 40 --seed 3 --out " + dir(out)), 0);
    ASSERT_EQ(run("estimate --obs " + obs + " --method jeeds --seed 3 --out " + dir(out)), 0);
  }
  for (const char* f : {"trace_mcse.csv", "estimate_mcse.json", "trace_jeeds.csv", "estimate_jeeds.json"})
    EXPECT_EQ(slurp(kRoot / "e1" / f), slurp(kRoot / "e2" / f)) << f;
  const std::string trace = slurp(kRoot / "e1" / "trace_mcse.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')),
            "obs_index,est_sigma_x,est_sigma_y,est_rho,est_lambda,neff,resampled_flag,jd_if_truth_known");
  EXPECT_NE(slurp(kRoot / "e1" / "estimate_mcse.json").find("final_jd"), std::string::npos);
  ASSERT_EQ(run("plot --trace mcse=" + (kRoot / "e1" / "trace_mcse.csv").string() + " --out " + dir("e1")), 0);
  EXPECT_EQ(slurp(kRoot / "e1" / "jd.svg").rfind("<svg", 0), 0u);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  const std::string env = "MCSE_OUTPUT_DIR=" + dir("env") + " ";
  const std::string cmd = env + MCSE_CLI_PATH + " simulate --agent rational --sigma 20,20,0 --n 2 --resolution 10 >/dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(kRoot / "env" / "observations.csv"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("simulate --bogus"), 2);
  EXPECT_EQ(run("simulate --agent greedy --out " + dir("x")), 2);
  EXPECT_EQ(run("simulate --agent rational --sigma 10,10,1.2 --out " + dir("x")), 2);
  EXPECT_EQ(run("estimate --obs " + dir("nowhere.csv") + " --out " + dir("x")), 3);
  {
    fs::create_directories(kRoot / "bad");
    std::ofstream(kRoot / "bad" / "observations.csv") << "obs_index,state_id,x,y\n0,0,abc,1\n";
  }
  EXPECT_EQ(run("estimate --obs " + (kRoot / "bad" / "observations.csv").string() + " --out " + dir("x")), 3);
  {
    std::ofstream(kRoot / "bad" / "pitches.csv") << "pitcher,pitch_type,plate_x,plate_z\np,FF,0,2\n";
  }
  EXPECT_EQ(run("baseball --data " + (kRoot / "bad" / "pitches.csv").string() + " --out " + dir("x")), 3);
}

TEST_F(Cli, ValidateConfig) {
  fs::create_directories(kRoot / "cfg");
  std::ofstream(kRoot / "cfg" / "good.json") << R"({"seed": 4, "simulate": {"agent": "flip", "lambda": 0.5, "n": 10},
    "estimate": {"m": 500, "r": 0.9, "w-pct": 0.005}})";
  std::ofstream(kRoot / "cfg" / "unknown.json") << R"({"simulate": {"agnt": "flip"}})";
  std::ofstream(kRoot / "cfg" / "range.json") << R"({"estimate": {"r": 1.5}})";
  std::ofstream(kRoot / "cfg" / "syntax.json") << R"({"simulate": )";
  EXPECT_EQ(run("validate-config --file " + (kRoot / "cfg" / "good.json").string()), 0);
  EXPECT_EQ(run("validate-config --file " + (kRoot / "cfg" / "unknown.json").string()), 2);
  EXPECT_EQ(run("validate-config --file " + (kRoot / "cfg" / "range.json").string()), 2);
  EXPECT_NE(run("validate-config --file " + (kRoot / "cfg" / "syntax.json").string()), 0);
  EXPECT_EQ(run("validate-config --file " + (kRoot / "cfg" / "missing.json").string()), 3);
}
