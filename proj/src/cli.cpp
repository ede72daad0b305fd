#include "pbcmps/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pbcmps/errors.hpp"
#include "pbcmps/io.hpp"
#include "pbcmps/observables.hpp"
#include "pbcmps/oracles.hpp"

namespace pbcmps {

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::optimize: return "optimize";
    case RunMode::scan: return "scan";
    case RunMode::observables: return "observables";
    case RunMode::oracle: return "oracle";
    case RunMode::report: return "report";
  }
  return "?";
}

RunMode parse_mode(const std::string& s) {
  for (RunMode m : {RunMode::optimize, RunMode::scan, RunMode::observables, RunMode::oracle, RunMode::report})
    if (s == to_string(m)) return m;
  throw ValidationError("unknown mode '" + s + "'");
}

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      out = static_cast<T>(std::stod(value, &used));
      if (used == value.size() && std::isfinite(out)) return out;
    } catch (const std::exception&) {
    }
  } else {
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec == std::errc() && ptr == value.data() + value.size()) return out;
  }
  throw ValidationError("invalid value '" + value + "' for " + key);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool same_scan(const ScanConfig& a, const ScanConfig& b) {
  return a.k == b.k && a.plateau_tolerance == b.plateau_tolerance && a.fixed_m == b.fixed_m;
}

bool same_optimize(const OptimizeConfig& a, const OptimizeConfig& b) {
  return a.max_iterations == b.max_iterations && a.gradient_tolerance == b.gradient_tolerance &&
         a.energy_tolerance == b.energy_tolerance && a.line_search.c1 == b.line_search.c1 &&
         a.line_search.c2 == b.line_search.c2 && a.line_search.max_evaluations == b.line_search.max_evaluations &&
         a.restart_period == b.restart_period && a.checkpoint_every == b.checkpoint_every &&
         a.checkpoint_dir == b.checkpoint_dir && a.precondition == b.precondition &&
         a.precondition_floor == b.precondition_floor;
}

}  // namespace

bool operator==(const RunSpec& a, const RunSpec& b) {
  return a.model == b.model && a.N == b.N && a.D == b.D && a.mode == b.mode && a.m == b.m && a.n == b.n &&
         same_scan(a.scan, b.scan) && same_optimize(a.optimize, b.optimize) && a.init == b.init &&
         a.tensor_file == b.tensor_file && a.out == b.out && a.results == b.results && a.seed == b.seed;
}

void set_field(RunSpec& s, const std::string& key, const std::string& value) {
  if (key == "model") s.model = value;
  else if (key == "N") s.N = parse_number<long long>(key, value);
  else if (key == "D") s.D = parse_number<int>(key, value);
  else if (key == "mode") s.mode = parse_mode(value);
  else if (key == "m") s.m = parse_number<int>(key, value);
  else if (key == "n") s.n = parse_number<int>(key, value);
  else if (key == "k") s.scan.k = parse_number<double>(key, value);
  else if (key == "plateau_tol") s.scan.plateau_tolerance = parse_number<double>(key, value);
  else if (key == "fixed_m") s.scan.fixed_m = parse_number<int>(key, value);
  else if (key == "max_iterations") s.optimize.max_iterations = parse_number<int>(key, value);
  else if (key == "tol_grad") s.optimize.gradient_tolerance = parse_number<double>(key, value);
  else if (key == "tol_energy") s.optimize.energy_tolerance = parse_number<double>(key, value);
  else if (key == "c1") s.optimize.line_search.c1 = parse_number<double>(key, value);
  else if (key == "c2") s.optimize.line_search.c2 = parse_number<double>(key, value);
  else if (key == "max_line_evaluations") s.optimize.line_search.max_evaluations = parse_number<int>(key, value);
  else if (key == "restart_period") s.optimize.restart_period = parse_number<int>(key, value);
  else if (key == "checkpoint_every") s.optimize.checkpoint_every = parse_number<int>(key, value);
  else if (key == "precondition") s.optimize.precondition = parse_number<int>(key, value) != 0;
  else if (key == "precondition_floor") s.optimize.precondition_floor = parse_number<double>(key, value);
  else if (key == "checkpoint_dir") s.optimize.checkpoint_dir = value;
  else if (key == "init") s.init = parse_init_strategy(value);
  else if (key == "tensor_file") s.tensor_file = value;
  else if (key == "out") s.out = value;
  else if (key == "results") s.results = value;
  else if (key == "seed") s.seed = parse_number<std::uint64_t>(key, value);
  else throw ValidationError("unknown key '" + key + "'");
}

std::string serialize(const RunSpec& s) {
  std::ostringstream os;
  os << "model=" << s.model << "\n"
     << "N=" << s.N << "\n"
     << "D=" << s.D << "\n"
     << "mode=" << to_string(s.mode) << "\n";
  if (s.m) os << "m=" << *s.m << "\n";
  if (s.n) os << "n=" << *s.n << "\n";
  os << "k=" << g17(s.scan.k) << "\n"
     << "plateau_tol=" << g17(s.scan.plateau_tolerance) << "\n";
  if (s.scan.fixed_m) os << "fixed_m=" << *s.scan.fixed_m << "\n";
  os << "max_iterations=" << s.optimize.max_iterations << "\n"
     << "tol_grad=" << g17(s.optimize.gradient_tolerance) << "\n"
     << "tol_energy=" << g17(s.optimize.energy_tolerance) << "\n"
     << "c1=" << g17(s.optimize.line_search.c1) << "\n"
     << "c2=" << g17(s.optimize.line_search.c2) << "\n"
     << "max_line_evaluations=" << s.optimize.line_search.max_evaluations << "\n"
     << "restart_period=" << s.optimize.restart_period << "\n"
     << "precondition=" << (s.optimize.precondition ? 1 : 0) << "\n"
     << "precondition_floor=" << g17(s.optimize.precondition_floor) << "\n"
     << "checkpoint_every=" << s.optimize.checkpoint_every << "\n";
  if (!s.optimize.checkpoint_dir.empty()) os << "checkpoint_dir=" << s.optimize.checkpoint_dir.string() << "\n";
  os << "init=" << to_string(s.init) << "\n";
  if (!s.tensor_file.empty()) os << "tensor_file=" << s.tensor_file.string() << "\n";
  if (!s.results.empty()) os << "results=" << s.results.string() << "\n";
  os << "out=" << s.out.string() << "\n"
     << "seed=" << s.seed << "\n";
  return os.str();
}

RunSpec parse_spec(const std::string& text) {
  RunSpec s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("line " + std::to_string(lineno) + ": expected key=value");
    set_field(s, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return s;
}

RunSpec load_spec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("cannot read config " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

void validate(const RunSpec& s) {
  if (s.mode == RunMode::report) return;
  parse_model(s.model);
  if (s.N < 2) throw ValidationError("N must be at least 2");
  if (s.mode == RunMode::oracle) return;
  if (s.D < 1) throw ValidationError("D must be positive");
  const int m_max = static_cast<int>((s.N - 2) / 2);
  if (s.m && (*s.m < 0 || *s.m > m_max)) throw ValidationError("m must lie in [0, (N-2)/2]");
  if (s.n && (*s.n < 1 || *s.n > s.D * s.D)) throw ValidationError("n must lie in [1, D^2]");
  s.scan.validate();
  s.optimize.validate();
  if ((s.init == InitStrategy::file || s.init == InitStrategy::continuation || s.mode == RunMode::observables) &&
      s.tensor_file.empty())
    throw ValidationError("this run needs tensor_file");
}

namespace {

struct Observables {
  SublatticeExpectation z;
  SublatticeExpectation x;
  CorrelationProfile zz;
  CorrelationProfile xx;
};

Observables measure(const MpsTensor& A, const TwoSiteHamiltonian& model, long long N, int m, int n) {
  const Matrix Z = spin::z_operator(model.d);
  const Matrix X = spin::x_operator(model.d);
  Observables o;
  o.z = local_expectation(A, model, Z, N, n);
  o.x = local_expectation(A, model, X, N, n);
  o.zz = correlation_profile(A, model, "ZZ", Z, N, m, n);
  o.xx = correlation_profile(A, model, "XX", X, N, m, n);
  return o;
}

void write_observables(const std::filesystem::path& dir, const Observables& o, nlohmann::json& j) {
  write_profile_csv(dir / "correlators_ZZ.csv", o.zz);
  write_profile_csv(dir / "correlators_XX.csv", o.xx);
  j["observables"] = {{"Z", {{"even", o.z.even}, {"odd", o.z.odd}}}, {"X", {{"even", o.x.even}, {"odd", o.x.odd}}}};
  if (!o.zz.values.empty()) j["observables"]["half_chain_ZZ"] = o.zz.values.back();
  if (!o.xx.values.empty()) j["observables"]["half_chain_XX"] = o.xx.values.back();
}

void write_json(const std::filesystem::path& file, const nlohmann::json& j) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream(file) << j.dump(2) << "\n";
}

void summary(std::ostream& log, const std::string& model, long long N, int D, int m, int n, double energy,
             double grad, double seconds) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "model=%s N=%lld D=%d m=%d n=%d energy=%.15g grad=%.3e seconds=%.2f", model.c_str(),
                N, D, m, n, energy, grad, seconds);
  log << buf << "\n";
}

int run_oracle(const RunSpec& s, const TwoSiteHamiltonian& model, std::ostream& log) {
  nlohmann::json j = {{"model", model_string(model)}, {"N", s.N}, {"version", kVersion}};
  std::optional<double> ed;
  std::optional<double> ff;
  if (std::pow(static_cast<double>(model.d), static_cast<double>(s.N)) <= static_cast<double>(1 << 20)) {
    ed = exact_diagonalize(model, static_cast<int>(s.N)).energy;
    j["ed_energy"] = *ed;
  }
  if (model.name == "ising" && s.N % 2 == 0) {
    ff = ising_free_fermion(static_cast<int>(s.N), model.field.value_or(0.0)).energy;
    j["free_fermion_energy"] = *ff;
  }
  bool agree = true;
  if (ed && ff) {
    agree = std::abs(*ed - *ff) <= 1e-10 * std::abs(*ff);
    j["agree"] = agree;
  }
  write_json(s.out / "oracle.json", j);
  char buf[256];
  std::snprintf(buf, sizeof buf, "model=%s N=%lld ed=%s free_fermion=%s agree=%s", model_string(model).c_str(), s.N,
                ed ? g17(*ed).c_str() : "n/a", ff ? g17(*ff).c_str() : "n/a", agree ? "yes" : "no");
  log << buf << "\n";
  if (!ed && !ff) return exit_code::validation;
  return agree ? exit_code::ok : exit_code::oracle_mismatch;
}

}  // namespace

int run(const RunSpec& s, std::ostream& log) {
  if (s.mode == RunMode::report) return report(s.results.empty() ? s.out : s.results, s.out, log);
  validate(s);
  const TwoSiteHamiltonian model = parse_model(s.model);
  if (s.mode == RunMode::oracle) return run_oracle(s, model, log);

  const int m = s.m.value_or(static_cast<int>((s.N - 2) / 2));
  const int n = s.n.value_or(s.D * s.D);
  std::filesystem::create_directories(s.out);
  std::ofstream(s.out / "run.cfg") << serialize(s);

  if (s.mode == RunMode::observables) {
    const MpsTensor A = read_tensor(s.tensor_file);
    if (A.phys_dim() != model.d) throw ValidationError("tensor does not match the model");
    const EnergyGradient eg = energy_gradient(A, model.h, s.N, m, std::min(n, A.bond_dim() * A.bond_dim()));
    const int nn = std::min(n, A.bond_dim() * A.bond_dim());
    const Observables o = measure(A, model, s.N, m, nn);
    nlohmann::json j = {{"version", kVersion}, {"model", model_string(model)}, {"N", s.N}, {"D", A.bond_dim()},
                        {"m", m}, {"n", nn}, {"energy", eg.value}};
    write_observables(s.out, o, j);
    write_json(s.out / "observables.json", j);
    double grad = eg.gradient.size() ? eg.gradient.cwiseAbs().maxCoeff() : 0.0;
    summary(log, model_string(model), s.N, A.bond_dim(), m, nn, eg.value, grad, 0.0);
    return exit_code::ok;
  }

  InitRequest req;
  req.strategy = s.init;
  req.seed = s.seed;
  if (s.init == InitStrategy::file) req.file = s.tensor_file;
  if (s.init == InitStrategy::continuation) req.source = read_tensor(s.tensor_file);
  const MpsTensor A0 = initialize(model, s.D, req);

  OptimizeConfig cfg = s.optimize;
  cfg.seed = s.seed;
  if (cfg.checkpoint_every > 0 && cfg.checkpoint_dir.empty()) cfg.checkpoint_dir = s.out / "checkpoint";
  const RunResult r = s.mode == RunMode::scan ? scan_mn(A0, model, s.N, s.scan, cfg) : minimize(A0, model, s.N, m, n, cfg);

  write_run_artifacts(s.out, r, s.seed);
  nlohmann::json j = to_json(r, s.seed);
  write_observables(s.out, measure(r.tensor, model, s.N, r.m, r.n), j);
  write_json(s.out / "result.json", j);
  summary(log, r.model, r.N, r.tensor.bond_dim(), r.m, r.n, r.energy, r.gradient_norm, r.wall_seconds);
  const bool ok = r.converged && (s.mode != RunMode::scan || r.plateau_detected);
  return ok ? exit_code::ok : exit_code::not_converged;
}

int report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir, std::ostream& log) {
  struct Row {
    std::string model;
    long long N;
    int D;
    int m;
    int n;
    double energy;
    std::optional<double> reference;
    std::string source;
  };
  std::vector<Row> rows;
  if (std::filesystem::exists(results_dir)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(results_dir))
      if (e.is_regular_file() && e.path().filename() == "result.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f);
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (j.is_discarded() || !j.contains("energy") || !j.contains("model")) {
        log << "skipping unreadable " << f.string() << "\n";
        continue;
      }
      Row r{j["model"].get<std::string>(), j["N"].get<long long>(), j["D"].get<int>(), j.value("m", 0),
            j.value("n", 0), j["energy"].get<double>(), std::nullopt, ""};
      if (j.contains("reference_energy")) {
        r.reference = j["reference_energy"].get<double>();
        r.source = "file";
      } else {
        try {
          if (auto e = reference_ground_energy(parse_model(r.model), static_cast<int>(r.N))) {
            r.reference = *e / static_cast<double>(r.N);
            r.source = "oracle";
          }
        } catch (const std::exception&) {
        }
      }
      rows.push_back(std::move(r));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.model, a.N, a.D) < std::tie(b.model, b.N, b.D);
  });

  std::filesystem::create_directories(out_dir);
  std::ofstream table(out_dir / "report.csv");
  table << "model,N,D,m,n,energy,reference,delta_rel,flag\n";
  std::map<std::pair<std::string, long long>, std::vector<std::pair<double, double>>> groups;
  for (const Row& r : rows) {
    std::string delta = "";
    std::string flag = "ok";
    if (r.reference) {
      const double d = std::abs(r.energy - *r.reference) / std::abs(*r.reference);
      delta = g17(d);
      groups[{r.model, r.N}].emplace_back(r.D, d);
    } else {
      flag = "no-reference";
    }
    table << r.model << "," << r.N << "," << r.D << "," << r.m << "," << r.n << "," << g17(r.energy) << ","
          << (r.reference ? g17(*r.reference) : "") << "," << delta << "," << flag << "\n";
  }

  std::ofstream fits(out_dir / "fits.csv");
  fits << "model,N,mu,intercept,D_min,D_max,points,residual\n";
  for (const auto& [key, pts] : groups) {
    if (pts.size() < 3) continue;
    try {
      const PowerLawFit f = fit_power_law(pts);
      fits << key.first << "," << key.second << "," << g17(f.mu) << "," << g17(f.intercept) << "," << f.D_min << ","
           << f.D_max << "," << f.points_used << "," << g17(f.residual) << "\n";
      for (const auto& w : f.warnings) log << key.first << " N=" << key.second << ": " << w << "\n";
    } catch (const ValidationError& e) {
      log << key.first << " N=" << key.second << ": " << e.what() << "\n";
    }
  }
  log << "report rows=" << rows.size() << " groups=" << groups.size() << "\n";
  return exit_code::ok;
}

}  // namespace pbcmps
