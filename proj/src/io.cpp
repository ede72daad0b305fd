#include "pbcmps/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pbcmps/errors.hpp"

namespace pbcmps {
namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

}  // namespace

void write_tensor(const std::filesystem::path& file, const MpsTensor& A) {
  std::ofstream out = open_out(file);
  const int d = A.phys_dim();
  const int D = A.bond_dim();
  out << "pbcmps-tensor v1 " << d << " " << D << "\n";
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < D; ++a) {
      for (int b = 0; b < D; ++b) out << (b ? " " : "") << g17(A.entry(i, a, b));
      out << "\n";
    }
}

MpsTensor read_tensor(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot read tensor file " + file.string());
  std::string magic, version;
  int d = 0;
  int D = 0;
  if (!(in >> magic >> version >> d >> D) || magic != "pbcmps-tensor" || version != "v1" || d < 1 || D < 1)
    throw ValidationError("malformed tensor header in " + file.string());
  std::vector<double> values(static_cast<std::size_t>(d) * D * D);
  for (double& v : values)
    if (!(in >> v)) throw ValidationError("truncated tensor file " + file.string());
  try {
    return MpsTensor::from_flat(d, D, values);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("invalid tensor in ") + file.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const RunResult& r, std::uint64_t seed) {
  nlohmann::json trace = nlohmann::json::array();
  for (const ScanPoint& p : r.trace)
    trace.push_back({{"m", p.m},
                     {"n", p.n},
                     {"energy", p.energy},
                     {"gradient_norm", p.gradient_norm},
                     {"iterations", p.iterations},
                     {"converged", p.converged}});
  return {{"version", kVersion},
          {"model", r.model},
          {"N", r.N},
          {"d", r.tensor.phys_dim()},
          {"D", r.tensor.bond_dim()},
          {"m", r.m},
          {"n", r.n},
          {"seed", seed},
          {"energy", r.energy},
          {"gradient_norm", r.gradient_norm},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"stop_reason", to_string(r.reason)},
          {"plateau_detected", r.plateau_detected},
          {"trace", trace},
          {"timing", {{"wall_seconds", r.wall_seconds}}}};
}

void write_scan_trace(const std::filesystem::path& file, const RunResult& r, std::uint64_t seed) {
  std::ofstream out = open_out(file);
  out << "# model=" << r.model << " N=" << r.N << " D=" << r.tensor.bond_dim() << " seed=" << seed
      << " version=" << kVersion << "\n";
  out << "m,n,energy,gradient_norm,iterations,converged\n";
  for (const ScanPoint& p : r.trace)
    out << p.m << "," << p.n << "," << g17(p.energy) << "," << g17(p.gradient_norm) << "," << p.iterations << ","
        << (p.converged ? 1 : 0) << "\n";
}

void write_run_artifacts(const std::filesystem::path& dir, const RunResult& r, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const nlohmann::json j = to_json(r, seed);
  open_out(dir / "result.json") << j.dump(2) << "\n";
  write_tensor(dir / "tensor.txt", r.tensor);
  nlohmann::json meta = {{"format", "pbcmps-tensor v1"},
                         {"version", kVersion},
                         {"model", r.model},
                         {"N", r.N},
                         {"d", r.tensor.phys_dim()},
                         {"D", r.tensor.bond_dim()},
                         {"m", r.m},
                         {"n", r.n},
                         {"seed", seed},
                         {"energy", r.energy}};
  open_out(dir / "tensor.json") << meta.dump(2) << "\n";
  if (!r.trace.empty()) write_scan_trace(dir / "scan_trace.csv", r, seed);
}

}  // namespace pbcmps
