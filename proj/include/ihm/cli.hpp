#pragma once

// Command-line driver. Exit codes: 0 success, 1 invalid input or library
// error (JSON object on stderr), 2 solver did not converge (artifacts are
// still written and flagged).

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "ihm/io.hpp"

namespace ihm::cli {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* out_dir_env = "IHM_OUT_DIR";

namespace fs = std::filesystem;
using io::json;
using ordered_json = nlohmann::ordered_json;

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "sha256 failed");
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i)
    ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

inline json versions() {
  return {{"ihm", version},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", CLI11_VERSION},
          {"openssl", OPENSSL_VERSION_TEXT}};
}

/// Input file with its content hash, read once.
struct Input {
  std::string path;
  std::string text;
  std::string sha256;
};

inline Input load(const std::string& path) {
  Input in{path, io::read_text(path), {}};
  in.sha256 = sha256_hex(in.text);
  return in;
}

inline json describe(const std::map<std::string, Input>& inputs) {
  json j = json::object();
  for (const auto& [role, in] : inputs) j[role] = {{"path", in.path}, {"sha256", in.sha256}};
  return j;
}

/// Aligned plain-text table; the first row is the header.
inline std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w;
  for (const auto& r : rows)
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (w.size() <= k) w.push_back(0);
      w[k] = std::max(w[k], r[k].size());
    }
  std::ostringstream ss;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t k = 0; k < r.size(); ++k) {
      line += r[k];
      if (k + 1 < r.size()) line += std::string(w[k] - r[k].size() + 2, ' ');
    }
    ss << line << "\n";
  }
  return ss.str();
}

inline std::string fmt(double v) { return io::cell(v); }

inline fs::path default_out(const std::string& fallback) {
  if (const char* env = std::getenv(out_dir_env); env && *env) return fs::path(env);
  return fs::path(fallback);
}

inline void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + p.string() + ": " + ec.message());
}

struct Options {
  std::string complex_path, sigma_path, tau_path, metric_path, map_path, out, run_dir;
  std::string report_path, diag_path;
  std::string format = "json";
  std::string mode = "W";
  std::string schedule = "2";
  double h = 0.05;
  double min_angle = 20.0;
  double tol = 1e-8;
  double complete_tol = 1e-9;
  int max_iterations = 200;
  int threads = 1;
  std::uint64_t seed = 12345;
  int degree_samples = 25;
  bool dump_mesh = false;
};

struct Loaded {
  Complex complex;
  ComplexSpec spec;
};

inline Loaded load_complex(const Input& in) {
  Loaded l;
  l.complex = build_complex(io::complex_from_json(io::parse(in.text, in.path)));
  l.spec = l.complex.spec();
  return l;
}

inline IdealMetric load_metric(const Complex& c, const Input& in) {
  return io::metric_from_json(c, io::parse(in.text, in.path));
}

inline void require_complete(const Complex& c, const IdealMetric& m, double tol, const std::string& name) {
  const double r = max_abs_residual(completeness_residuals(c, m));
  if (!(r <= tol))
    throw Error(ErrorKind::IncompleteMetric,
                name + " is not complete: max residual " + io::cell(r) + " > " + io::cell(tol));
}

inline std::vector<double> parse_schedule(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size())
      throw Error(ErrorKind::InvalidSpec, "bad y-cut schedule entry \"" + item + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::InvalidSpec, "empty y-cut schedule");
  return out;
}

// ---- subcommands ------------------------------------------------------------

inline int cmd_validate(const Options& o) {
  std::map<std::string, Input> inputs{{"complex", load(o.complex_path)}};
  const Loaded l = load_complex(inputs.at("complex"));
  const Counts k = counts(l.complex);
  ordered_json out;
  out["valid"] = true;
  out["F"] = k.faces;
  out["E"] = k.edges;
  out["V"] = k.vertices;
  out["degree_sum"] = k.degree_sum;
  out["singular_edges"] = k.singular_edges;
  for (const auto& [role, path] : {std::pair{"sigma", o.sigma_path}, std::pair{"tau", o.tau_path}}) {
    if (path.empty()) continue;
    const IdealMetric m = load_metric(l.complex, load(path));
    const double r = max_abs_residual(completeness_residuals(l.complex, m));
    out[role] = {{"complete", r <= o.complete_tol}, {"max_abs_residual", r}};
    require_complete(l.complex, m, o.complete_tol, role);
  }
  std::cout << out.dump() << "\n";
  return 0;
}

inline int cmd_dims(const Options& o) {
  const Loaded l = load_complex(load(o.complex_path));
  const Dims d = dims(l.complex);
  ordered_json out;
  out["F"] = l.complex.num_triangles();
  out["E"] = l.complex.num_edges();
  out["V"] = l.complex.num_vertices();
  out["metric_dim"] = d.metric_dim;
  out["relations"] = d.relation_count;
  out["teich_dim"] = d.teich_dim;
  if (o.format == "text") {
    std::vector<std::vector<std::string>> rows(2);
    for (const auto& [key, value] : out.items()) {
      rows[0].push_back(key);
      rows[1].push_back(value.dump());
    }
    rows[0].push_back("E-V");
    rows[1].push_back(std::to_string(d.closed_form) + (d.closed_form_applies ? "" : " (n/a)"));
    std::cout << table(rows);
  } else {
    std::cout << out.dump() << "\n";
  }
  return 0;
}

inline int cmd_complete_check(const Options& o) {
  const Loaded l = load_complex(load(o.complex_path));
  const IdealMetric m = load_metric(l.complex, load(o.metric_path));
  const auto res = completeness_residuals(l.complex, m);
  const double r = max_abs_residual(res);
  const bool ok = r <= o.complete_tol;
  if (o.format == "text") {
    std::vector<std::vector<std::string>> rows{{"vertex", "cycle", "residual"}};
    for (const CompletenessResidual& x : res)
      rows.push_back({std::to_string(x.vertex), std::to_string(x.cycle), fmt(x.residual)});
    std::cout << table(rows) << "max |residual| " << fmt(r) << (ok ? "  complete" : "  INCOMPLETE") << "\n";
  } else {
    ordered_json out;
    out["complete"] = ok;
    out["max_abs_residual"] = r;
    out["tol"] = o.complete_tol;
    json rows = json::array();
    for (const CompletenessResidual& x : res)
      rows.push_back({{"vertex", x.vertex}, {"cycle", x.cycle}, {"residual", x.residual}});
    out["residuals"] = rows;
    std::cout << out.dump() << "\n";
  }
  if (!ok)
    throw Error(ErrorKind::IncompleteMetric, "max residual " + io::cell(r) + " > " + io::cell(o.complete_tol));
  return 0;
}

inline int cmd_solve(const Options& o) {
  std::map<std::string, Input> inputs{{"complex", load(o.complex_path)},
                                      {"sigma", load(o.sigma_path)},
                                      {"tau", load(o.tau_path)}};
  const Loaded l = load_complex(inputs.at("complex"));
  const IdealMetric sigma = load_metric(l.complex, inputs.at("sigma"));
  const IdealMetric tau = load_metric(l.complex, inputs.at("tau"));
  require_complete(l.complex, sigma, o.complete_tol, "sigma");
  require_complete(l.complex, tau, o.complete_tol, "tau");
  if (o.mode != "W" && o.mode != "D") throw Error(ErrorKind::InvalidSpec, "mode must be W or D");
  if (o.threads < 1) throw Error(ErrorKind::InvalidSpec, "threads must be at least 1");

  SolverConfig scfg;
  scfg.barrier = o.mode == "D";
  scfg.tol = o.tol;
  scfg.max_iterations = o.max_iterations;
  scfg.threads = o.threads;
  scfg.schedule = parse_schedule(o.schedule);
  MeshConfig mcfg;
  mcfg.h = o.h;
  mcfg.min_angle_deg = o.min_angle;
  mcfg.y_cut = scfg.schedule.front();

  const fs::path out = o.out.empty() ? default_out("ihm-run") : fs::path(o.out);
  make_dir(out);
  const ExhaustionResult res = solve_with_exhaustion(l.complex, sigma, tau, scfg, mcfg);
  const ComplexMesh& mesh = *res.map.mesh;
  const EnergyReport& fin = res.stages.back().report;

  bool converged = true;
  json stages = json::array();
  std::ostringstream trace;
  trace << "# seed " << o.seed << "\n";
  trace << "stage,y_cut,iteration,objective,energy,min_jacobian\n";
  for (std::size_t k = 0; k < res.stages.size(); ++k) {
    const StageResult& st = res.stages[k];
    converged = converged && st.report.converged;
    stages.push_back({{"y_cut", st.y_cut},
                      {"nodes", st.nodes},
                      {"displacement", st.displacement},
                      {"energy", st.report.total},
                      {"iterations", st.report.iterations},
                      {"converged", st.report.converged}});
    for (std::size_t i = 0; i < st.report.trace.size(); ++i)
      trace << k << "," << io::cell(st.y_cut) << "," << i << "," << io::cell(st.report.trace[i]) << ","
            << io::cell(st.report.energy_trace[i]) << "," << io::cell(st.report.jacobian_trace[i]) << "\n";
  }
  const double area = mesh.truncated_area();
  json report = {{"seed", o.seed},
                 {"mode", o.mode},
                 {"h", o.h},
                 {"schedule", scfg.schedule},
                 {"nodes", mesh.num_nodes()},
                 {"triangles", mesh.num_triangles()},
                 {"truncated_area", area},
                 {"energy", fin.total},
                 {"energy_over_twice_area", fin.total / (2.0 * area)},
                 {"converged", converged},
                 {"stages", stages},
                 {"final", io::to_json(fin)}};
  json map = io::map_to_json(res.map, l.spec, scfg.schedule);
  map["seed"] = o.seed;
  io::write_text((out / "map.json").string(), io::dump(map));
  io::write_text((out / "report.json").string(), io::dump(report));
  io::write_text((out / "trace.csv").string(), trace.str());
  json outputs = {"map.json", "report.json", "trace.csv"};
  if (o.dump_mesh) {
    json m = io::to_json(mesh);
    m["seed"] = o.seed;
    io::write_text((out / "mesh.json").string(), io::dump(m));
    outputs.push_back("mesh.json");
  }
  json manifest = {{"command", "solve"},
                   {"seed", o.seed},
                   {"threads", o.threads},
                   {"inputs", describe(inputs)},
                   {"mesh_config", io::to_json(mcfg)},
                   {"solver_config", io::to_json(scfg)},
                   {"outputs", outputs},
                   {"versions", versions()}};
  io::write_text((out / "manifest.json").string(), io::dump(manifest));

  ordered_json summary;
  summary["converged"] = converged;
  summary["energy"] = fin.total;
  summary["truncated_area"] = area;
  summary["out"] = out.string();
  std::cout << summary.dump() << "\n";
  return converged ? 0 : 2;
}

inline int cmd_verify(const Options& o) {
  std::map<std::string, Input> inputs{{"map", load(o.map_path)}};
  const SimplicialMap u = io::map_from_json(io::parse(inputs.at("map").text, o.map_path));
  DiagnoseConfig cfg;
  cfg.seed = o.seed;
  cfg.degree_samples_per_face = o.degree_samples;
  const DiagnosticsReport d = diagnose(u, cfg);

  fs::path diag = o.out.empty() ? (std::getenv(out_dir_env) ? default_out(".") / "diag.json"
                                                            : fs::path(o.map_path).parent_path() / "diag.json")
                                : fs::path(o.out);
  if (diag.has_parent_path()) make_dir(diag.parent_path());
  const fs::path dir = diag.has_parent_path() ? diag.parent_path() : fs::path(".");
  const std::string stem = diag.stem().string();

  std::ostringstream bal, hopf_csv, lip;
  const std::string seed_line = "# seed " + std::to_string(o.seed) + "\n";
  bal << seed_line << "edge,y,strong,hopf_im\n";
  for (const EdgeBalance& e : d.edges)
    for (const BalanceSample& s : e.profile)
      bal << e.edge << "," << io::cell(s.y) << "," << io::cell(s.strong) << "," << io::cell(s.hopf_im) << "\n";
  hopf_csv << seed_line << "face,triangle,x,y,re,im\n";
  for (std::size_t t = 0; t < u.mesh->faces.size(); ++t) {
    const HopfField h = hopf(u, static_cast<int>(t));
    for (std::size_t k = 0; k < h.triangles.size(); ++k) {
      double cx = 0.0, cy = 0.0;
      for (int v : h.triangles[k]) {
        cx += h.nodes[v].x / 3.0;
        cy += h.nodes[v].y / 3.0;
      }
      hopf_csv << t << "," << k << "," << io::cell(cx) << "," << io::cell(cy) << ","
               << io::cell(h.phi[k].real()) << "," << io::cell(h.phi[k].imag()) << "\n";
    }
  }
  lip << seed_line << "edge,y,dfdy2,radius,bound\n";
  for (const EdgePointBound& b : d.lipschitz.edge_points)
    lip << b.edge << "," << io::cell(b.y) << "," << io::cell(b.dfdy2) << "," << io::cell(b.radius) << ","
        << io::cell(b.bound) << "\n";

  const std::string names[] = {stem + "_balance.csv", stem + "_hopf.csv", stem + "_lipschitz.csv"};
  io::write_text(diag.string(), io::dump(io::to_json(d)));
  io::write_text((dir / names[0]).string(), bal.str());
  io::write_text((dir / names[1]).string(), hopf_csv.str());
  io::write_text((dir / names[2]).string(), lip.str());
  json manifest = {{"command", "verify"},
                   {"seed", o.seed},
                   {"inputs", describe(inputs)},
                   {"config", {{"degree_samples_per_face", cfg.degree_samples_per_face},
                               {"y_interior", d.lipschitz.y_interior}}},
                   {"outputs", {diag.filename().string(), names[0], names[1], names[2]}},
                   {"versions", versions()}};
  io::write_text((dir / (stem + "_manifest.json")).string(), io::dump(manifest));

  ordered_json summary;
  summary["energy"] = d.energy;
  summary["degree"] = d.degree.degree;
  summary["degree_consistent"] = d.degree.consistent;
  summary["out"] = diag.string();
  std::cout << summary.dump() << "\n";
  return 0;
}

inline int cmd_report(const Options& o) {
  const fs::path run = o.run_dir.empty() ? default_out("ihm-run") : fs::path(o.run_dir);
  const std::string rp = o.report_path.empty() ? (run / "report.json").string() : o.report_path;
  const std::string dp = o.diag_path.empty() ? (run / "diag.json").string() : o.diag_path;
  const json r = io::read_json(rp);
  const json d = io::read_json(dp);
  auto num = [](const json& j) { return j.is_number() ? fmt(j.get<double>()) : j.dump(); };

  std::vector<std::vector<std::string>> rows{{"quantity", "value"}};
  rows.push_back({"mode", r.value("mode", "?")});
  rows.push_back({"h", num(r.value("h", json()))});
  rows.push_back({"nodes", r.value("nodes", json()).dump()});
  rows.push_back({"triangles", r.value("triangles", json()).dump()});
  rows.push_back({"converged", r.value("converged", json()).dump()});
  rows.push_back({"energy", num(r.value("energy", json()))});
  rows.push_back({"truncated area", num(r.value("truncated_area", json()))});
  rows.push_back({"energy / (2 area)", num(r.value("energy_over_twice_area", json()))});
  const json fin = r.value("final", json::object());
  rows.push_back({"iterations", fin.value("iterations", json()).dump()});
  rows.push_back({"stationarity", num(fin.value("stationarity", json()))});
  rows.push_back({"min jacobian (solve)", num(fin.value("min_jacobian", json()))});
  rows.push_back({"hopf max |phi| y^2", num(d.value("hopf_max_norm", json()))});
  rows.push_back({"hopf dbar norm", num(d.value("hopf_dbar_norm", json()))});
  rows.push_back({"pde residual", num(d.value("pde_residual", json()))});
  rows.push_back({"strong balance (max)", num(d.value("strong_balance_max", json()))});
  const json deg = d.value("degree", json::object());
  rows.push_back({"degree", deg.value("degree", json()).dump() +
                                (deg.value("consistent", false) ? "" : " (inconsistent)")});
  const json lip = d.value("lipschitz", json::object());
  rows.push_back({"edge gradient bound", lip.value("edge_bound_holds", false) ? "holds" : "violated"});
  rows.push_back({"sup density / energy", num(lip.value("ratio", json()))});
  std::cout << table(rows);

  const json stages = r.value("stages", json::array());
  if (stages.size() > 1) {
    std::vector<std::vector<std::string>> st{{"y_cut", "nodes", "energy", "iterations", "displacement"}};
    for (const json& s : stages)
      st.push_back({num(s.value("y_cut", json())), s.value("nodes", json()).dump(),
                    num(s.value("energy", json())), s.value("iterations", json()).dump(),
                    num(s.value("displacement", json()))});
    std::cout << "\n" << table(st);
  }
  return 0;
}

// ---- entry point ------------------------------------------------------------

inline void print_error(const std::string& kind, const std::string& message) {
  ordered_json e;
  e["error"] = kind;
  e["message"] = message;
  std::cerr << e.dump() << "\n";
}

inline int run(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Harmonic maps between ideal hyperbolic complexes", "ihm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version);

  auto* validate = app.add_subcommand("validate", "check a complex spec and optional metrics");
  validate->add_option("--complex", o.complex_path)->required();
  validate->add_option("--sigma", o.sigma_path);
  validate->add_option("--tau", o.tau_path);
  validate->add_option("--tol", o.complete_tol, "completeness tolerance");

  auto* dims_cmd = app.add_subcommand("dims", "dimension counts of the metric spaces");
  dims_cmd->add_option("--complex", o.complex_path)->required();
  dims_cmd->add_option("--format", o.format)->check(CLI::IsMember({"json", "text"}));

  auto* cc = app.add_subcommand("complete-check", "completeness residual per link cycle");
  cc->add_option("--complex", o.complex_path)->required();
  cc->add_option("--metric", o.metric_path)->required();
  cc->add_option("--tol", o.complete_tol, "completeness tolerance");
  cc->add_option("--format", o.format)->check(CLI::IsMember({"json", "text"}));

  auto* solve = app.add_subcommand("solve", "minimize the energy over the exhaustion schedule");
  solve->set_help_flag("--help", "print this help message and exit");  // -h would clash with --h
  solve->add_option("--complex", o.complex_path)->required();
  solve->add_option("--sigma", o.sigma_path)->required();
  solve->add_option("--tau", o.tau_path)->required();
  solve->add_option("--mode", o.mode, "W (weak) or D (orientation barrier)");
  solve->add_option("--h", o.h, "target hyperbolic edge length");
  solve->add_option("--ycut-schedule", o.schedule, "increasing cut levels, comma separated");
  solve->add_option("--min-angle", o.min_angle, "mesh quality bound in degrees");
  solve->add_option("--tol", o.tol, "relative stationarity tolerance");
  solve->add_option("--max-iterations", o.max_iterations);
  solve->add_option("--threads", o.threads);
  solve->add_option("--seed", o.seed);
  solve->add_option("--out", o.out, std::string("output directory (default $") + out_dir_env + " or ihm-run)");
  solve->add_option("--tol-complete", o.complete_tol, "completeness tolerance for the metrics");
  solve->add_flag("--dump-mesh", o.dump_mesh, "also write mesh.json");

  auto* verify = app.add_subcommand("verify", "diagnostics of a solved map");
  verify->add_option("--map", o.map_path)->required();
  verify->add_option("--out", o.out, "diagnostics JSON path (default next to the map)");
  verify->add_option("--seed", o.seed);
  verify->add_option("--degree-samples", o.degree_samples, "degree samples per face");

  auto* report = app.add_subcommand("report", "summary table of a solve and verify pair");
  report->add_option("--run", o.run_dir, "run directory");
  report->add_option("--report", o.report_path, "solve report (default <run>/report.json)");
  report->add_option("--diag", o.diag_path, "diagnostics (default <run>/diag.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << version << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error("Usage", e.what());
    return 1;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*dims_cmd) return cmd_dims(o);
    if (*cc) return cmd_complete_check(o);
    if (*solve) return cmd_solve(o);
    if (*verify) return cmd_verify(o);
    if (*report) return cmd_report(o);
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 1;
  }
  return 1;
}

}  // namespace ihm::cli
