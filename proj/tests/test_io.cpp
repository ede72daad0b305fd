#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pbcmps/errors.hpp"
#include "pbcmps/io.hpp"
#include "test_helpers.hpp"

using namespace pbcmps;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("pbcmps_io_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(TensorFile, RoundTripIsExact) {
  const MpsTensor A = pbcmps::testing::random_tensor(3, 4, 21);
  const auto file = scratch("tensor.txt");
  write_tensor(file, A);
  EXPECT_TRUE(read_tensor(file) == A);
  std::filesystem::remove(file);
}

TEST(TensorFile, MalformedRejected) {
  const auto file = scratch("bad.txt");
  std::ofstream(file) << "pbcmps-tensor v1 2 2\n1 2 3\n";
  EXPECT_THROW(read_tensor(file), ValidationError);
  std::ofstream(file) << "something else\n";
  EXPECT_THROW(read_tensor(file), ValidationError);
  std::ofstream(file) << "pbcmps-tensor v1 1 2\n1 2 3 4\n";
  EXPECT_THROW(read_tensor(file), ValidationError);
  EXPECT_THROW(read_tensor(scratch("missing.txt")), ValidationError);
  std::filesystem::remove(file);
}

TEST(Artifacts, WrittenForScan) {
  RunResult r;
  r.tensor = pbcmps::testing::random_tensor(2, 2, 22);
  r.model = "ising:B=1";
  r.N = 20;
  r.energy = -1.25;
  r.m = 5;
  r.n = 2;
  r.trace = {{5, 1, -1.2, 1e-9, 10, true}, {5, 2, -1.25, 1e-9, 12, true}};
  const auto dir = scratch("run");
  write_run_artifacts(dir, r, 7);
  for (const char* f : {"result.json", "tensor.txt", "tensor.json", "scan_trace.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;

  std::ifstream csv(dir / "scan_trace.csv");
  std::string meta, header, row;
  std::getline(csv, meta);
  std::getline(csv, header);
  EXPECT_EQ(meta.rfind("# model=ising:B=1", 0), 0u);
  EXPECT_EQ(header, "m,n,energy,gradient_norm,iterations,converged");
  int rows = 0;
  while (std::getline(csv, row)) ++rows;
  EXPECT_EQ(rows, 2);

  std::ifstream js(dir / "result.json");
  const auto j = nlohmann::json::parse(js);
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["D"], 2);
  EXPECT_EQ(j["energy"].get<double>(), -1.25);
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_TRUE(read_tensor(dir / "tensor.txt") == r.tensor);
  std::filesystem::remove_all(dir);
}
