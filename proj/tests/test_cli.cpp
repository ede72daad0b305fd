#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "pbcmps/cli.hpp"
#include "pbcmps/errors.hpp"

using namespace pbcmps;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("pbcmps_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

int exit_status(const std::string& args) {
  const std::string cmd = std::string(PBCMPS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(RunSpec, RoundTrip) {
  RunSpec s;
  s.model = "heisenberg-half";
  s.N = 40;
  s.D = 6;
  s.mode = RunMode::scan;
  s.m = 7;
  s.n = 11;
  s.scan.k = 0.25;
  s.scan.plateau_tolerance = 3.5e-11;
  s.scan.fixed_m = 2;
  s.optimize.gradient_tolerance = 1.0 / 3.0;
  s.optimize.max_iterations = 123;
  s.init = InitStrategy::continuation;
  s.tensor_file = "a/b.txt";
  s.out = "out dir";
  s.results = "res";
  s.seed = 18446744073709551615ull;
  EXPECT_TRUE(parse_spec(serialize(s)) == s);
  EXPECT_TRUE(parse_spec(serialize(RunSpec{})) == RunSpec{});
}

TEST(RunSpec, ParseErrors) {
  EXPECT_THROW(parse_spec("bogus=1\n"), ValidationError);
  EXPECT_THROW(parse_spec("N=ten\n"), ValidationError);
  EXPECT_THROW(parse_spec("D\n"), ValidationError);
  EXPECT_THROW(parse_spec("mode=fly\n"), ValidationError);
  EXPECT_THROW(parse_spec("k=nan\n"), ValidationError);
  const RunSpec s = parse_spec("# comment\n\n  N = 20 \nmodel=ising:B=0.5\n");
  EXPECT_EQ(s.N, 20);
  EXPECT_EQ(s.model, "ising:B=0.5");
}

TEST(RunSpec, Validation) {
  RunSpec s;
  EXPECT_NO_THROW(validate(s));
  s.N = 1;
  EXPECT_THROW(validate(s), ValidationError);
  s = {};
  s.m = 6;
  EXPECT_THROW(validate(s), ValidationError);
  s = {};
  s.n = 17;
  EXPECT_THROW(validate(s), ValidationError);
  s = {};
  s.model = "xxz";
  EXPECT_THROW(validate(s), ValidationError);
  s = {};
  s.init = InitStrategy::file;
  EXPECT_THROW(validate(s), ValidationError);
  s = {};
  s.mode = RunMode::observables;
  EXPECT_THROW(validate(s), ValidationError);
}

TEST(Run, OptimizeThenObservables) {
  const auto dir = scratch("opt");
  RunSpec s;
  s.N = 10;
  s.D = 2;
  s.out = dir / "run";
  std::ostringstream log;
  EXPECT_EQ(run(s, log), exit_code::ok);
  EXPECT_EQ(log.str().rfind("model=ising:B=1 N=10 D=2 m=4 n=4 energy=", 0), 0u);
  for (const char* f : {"result.json", "tensor.txt", "tensor.json", "correlators_ZZ.csv", "correlators_XX.csv", "run.cfg"})
    EXPECT_TRUE(std::filesystem::exists(s.out / f)) << f;
  EXPECT_TRUE(load_spec(s.out / "run.cfg") == s);

  std::ifstream in(s.out / "result.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_TRUE(j.contains("observables"));

  RunSpec o = s;
  o.mode = RunMode::observables;
  o.tensor_file = s.out / "tensor.txt";
  o.out = dir / "obs";
  std::ostringstream log2;
  EXPECT_EQ(run(o, log2), exit_code::ok);
  std::ifstream in2(o.out / "observables.json");
  const auto j2 = nlohmann::json::parse(in2);
  EXPECT_NEAR(j2["energy"].get<double>(), j["energy"].get<double>(), 1e-12);
  std::filesystem::remove_all(dir);
}

TEST(Run, NonConvergenceExitCode) {
  RunSpec s;
  s.N = 10;
  s.D = 3;
  s.optimize.max_iterations = 1;
  s.out = scratch("nc");
  std::ostringstream log;
  EXPECT_EQ(run(s, log), exit_code::not_converged);
  EXPECT_TRUE(std::filesystem::exists(s.out / "result.json"));
  std::filesystem::remove_all(s.out);
}

TEST(Run, OracleMode) {
  RunSpec s;
  s.mode = RunMode::oracle;
  s.N = 8;
  s.out = scratch("oracle");
  std::ostringstream log;
  EXPECT_EQ(run(s, log), exit_code::ok);
  std::ifstream in(s.out / "oracle.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_TRUE(j["agree"].get<bool>());
  std::filesystem::remove_all(s.out);
}

TEST(Report, EmptyDirectory) {
  const auto dir = scratch("empty");
  std::filesystem::create_directories(dir);
  std::ostringstream log;
  EXPECT_EQ(report(dir, dir / "rep", log), exit_code::ok);
  std::ifstream in(dir / "rep" / "report.csv");
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "model,N,D,m,n,energy,reference,delta_rel,flag");
  EXPECT_FALSE(static_cast<bool>(std::getline(in, row)));
  std::filesystem::remove_all(dir);
}

TEST(Report, SyntheticPowerLaw) {
  const auto dir = scratch("synthetic");
  const double ref = -1.25;
  for (int D : {8, 12, 16, 20}) {
    const double delta = 0.5 * std::pow(D, -7.84);
    const nlohmann::json j = {{"model", "ising:B=1"}, {"N", 100}, {"D", D}, {"m", 49}, {"n", D},
                              {"energy", ref * (1.0 - delta)}, {"reference_energy", ref}};
    std::filesystem::create_directories(dir / std::to_string(D));
    std::ofstream(dir / std::to_string(D) / "result.json") << j.dump();
  }
  std::ostringstream log;
  EXPECT_EQ(report(dir, dir / "rep", log), exit_code::ok);
  std::ifstream in(dir / "rep" / "fits.csv");
  std::string header, row;
  std::getline(in, header);
  ASSERT_TRUE(static_cast<bool>(std::getline(in, row)));
  std::stringstream ss(row);
  std::string model, N, mu;
  std::getline(ss, model, ',');
  std::getline(ss, N, ',');
  std::getline(ss, mu, ',');
  EXPECT_EQ(model, "ising:B=1");
  EXPECT_NEAR(std::stod(mu), 7.84, 1e-6);
  std::filesystem::remove_all(dir);
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch("bin");
  EXPECT_EQ(exit_status("--mode oracle --N 6 --out " + (dir / "o").string()), exit_code::ok);
  EXPECT_EQ(exit_status("--mode optimize --N 1 --out " + dir.string()), exit_code::validation);
  EXPECT_EQ(exit_status("--model nope --out " + dir.string()), exit_code::validation);
  EXPECT_EQ(exit_status("--no-such-flag"), exit_code::validation);
  EXPECT_EQ(exit_status("--mode report --results " + (dir / "none").string() + " --out " + (dir / "r").string()),
            exit_code::ok);
  std::filesystem::remove_all(dir);
}
