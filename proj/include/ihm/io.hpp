#pragma once

// JSON and CSV serialization. Doubles are written in shortest round-trip form,
// objects with sorted keys, so equal inputs give byte-identical files.

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ihm/complex.hpp"
#include "ihm/errors.hpp"
#include "ihm/mesh.hpp"
#include "ihm/metric.hpp"
#include "ihm/solver.hpp"
#include "ihm/verify.hpp"

namespace ihm::io {

using json = nlohmann::json;

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

inline json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, what + ": " + e.what());
  }
}

inline json read_json(const std::string& path) { return parse(read_text(path), path); }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// NaN and infinities have no JSON literal; they become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Shortest round-trip text for CSV cells, matching the JSON output.
inline std::string cell(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return json(v).dump();
}

namespace detail {

template <class T>
T get(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw Error(ErrorKind::InvalidSpec, what + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, what + ": bad \"" + key + "\": " + e.what());
  }
}

}  // namespace detail

// ---- complex ----------------------------------------------------------------

inline json to_json(const ComplexSpec& s) {
  json classes = json::array();
  for (const auto& cls : s.edge_classes) {
    json slots = json::array();
    for (const Slot& x : cls) slots.push_back({x.triangle, x.side, x.orientation});
    classes.push_back({{"slots", slots}});
  }
  return {{"triangles", s.triangles}, {"edge_classes", classes}};
}

inline ComplexSpec complex_from_json(const json& j) {
  ComplexSpec s;
  s.triangles = detail::get<int>(j, "triangles", "complex");
  const json& classes = j.contains("edge_classes") ? j.at("edge_classes") : json();
  if (!classes.is_array()) throw Error(ErrorKind::InvalidSpec, "complex: \"edge_classes\" must be an array");
  for (const json& cls : classes) {
    const auto slots = detail::get<std::vector<std::vector<int>>>(cls, "slots", "edge class");
    std::vector<Slot> out;
    for (const auto& v : slots) {
      if (v.size() != 3) throw Error(ErrorKind::InvalidSpec, "slot must be [triangle, side, orientation]");
      out.push_back({v[0], v[1], v[2]});
    }
    s.edge_classes.push_back(std::move(out));
  }
  return s;
}

// ---- metrics ----------------------------------------------------------------

/// Metric files map the canonical edge id to its stored shifts.
inline json to_json(const IdealMetric& m) {
  json shifts = json::object();
  for (std::size_t e = 0; e < m.shifts.size(); ++e) shifts[std::to_string(e)] = m.shifts[e];
  return {{"shifts", shifts}};
}

/// Degree-one edges may be omitted.
inline IdealMetric metric_from_json(const Complex& c, const json& j) {
  if (!j.is_object() || !j.contains("shifts") || !j.at("shifts").is_object())
    throw Error(ErrorKind::InvalidSpec, "metric: \"shifts\" must be an object keyed by edge id");
  const json& s = j.at("shifts");
  for (const auto& [key, value] : s.items()) {
    std::size_t used = 0;
    int e = -1;
    try {
      e = std::stoi(key, &used);
    } catch (const std::exception&) {
    }
    if (used != key.size() || e < 0 || e >= c.num_edges())
      throw Error(ErrorKind::InvalidSpec, "metric: unknown edge id \"" + key + "\"");
  }
  IdealMetric m = IdealMetric::zero(c);
  for (int e = 0; e < c.num_edges(); ++e) {
    const std::string key = std::to_string(e);
    if (!s.contains(key)) {
      if (m.shifts[e].empty()) continue;
      throw Error(ErrorKind::InvalidSpec, "metric: no shifts for edge " + key);
    }
    try {
      m.shifts[e] = s.at(key).get<std::vector<double>>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::InvalidSpec, "metric: shifts of edge " + key + " must be numbers");
    }
  }
  check_metric(c, m);
  return m;
}

// ---- configs ----------------------------------------------------------------

inline json to_json(const MeshConfig& m) {
  return {{"h", m.h}, {"y_cut", m.y_cut}, {"min_angle_deg", m.min_angle_deg},
          {"max_attempts", m.max_attempts}};
}

inline MeshConfig mesh_config_from_json(const json& j) {
  MeshConfig m;
  m.h = detail::get<double>(j, "h", "mesh config");
  m.y_cut = detail::get<double>(j, "y_cut", "mesh config");
  m.min_angle_deg = detail::get<double>(j, "min_angle_deg", "mesh config");
  m.max_attempts = detail::get<int>(j, "max_attempts", "mesh config");
  return m;
}

inline json to_json(const SolverConfig& s) {
  return {{"mode", s.barrier ? "D" : "W"},
          {"max_iterations", s.max_iterations},
          {"tol", s.tol},
          {"armijo", s.armijo},
          {"backtrack", s.backtrack},
          {"max_backtracks", s.max_backtracks},
          {"barrier_weight", s.barrier_weight},
          {"barrier_decay", s.barrier_decay},
          {"barrier_floor", s.barrier_floor},
          {"face_steps", s.face_steps},
          {"threads", s.threads},
          {"quadrature", s.quadrature == Quadrature::Exact ? "exact" : "one-point"},
          {"schedule", s.schedule}};
}

// ---- mesh and map dumps -----------------------------------------------------

inline json to_json(const ComplexMesh& m) {
  json faces = json::array();
  for (const FaceMesh& f : m.faces) {
    json nodes = json::array();
    for (const MeshNode& n : f.nodes) {
      json node = {{"x", n.p.x}, {"y", n.p.y}, {"kind", to_string(n.kind)}};
      if (n.side >= 0) node["side"] = n.side;
      if (n.corner >= 0) node["corner"] = n.corner;
      if (n.edge_node >= 0) node["edge_node"] = n.edge_node;
      nodes.push_back(std::move(node));
    }
    faces.push_back({{"face", f.face},
                     {"levels", f.levels},
                     {"min_angle_deg", f.min_angle_deg},
                     {"nodes", nodes},
                     {"triangles", f.triangles}});
  }
  json classes = json::array();
  for (const EdgeNodeClass& k : m.edge_nodes) {
    json members = json::array();
    for (const auto& [face, local] : k.members) members.push_back({face, local});
    classes.push_back({{"edge", k.edge}, {"y", k.y}, {"fixed", k.fixed}, {"members", members}});
  }
  return {{"cut_level", m.cut_level},
          {"config", to_json(m.cfg)},
          {"nodes", m.num_nodes()},
          {"triangles", m.num_triangles()},
          {"truncated_area", m.truncated_area()},
          {"faces", faces},
          {"edge_nodes", classes}};
}

/// Everything needed to rebuild the map: inputs, mesh recipe and node images.
inline json map_to_json(const SimplicialMap& u, const ComplexSpec& spec,
                        const std::vector<double>& schedule) {
  const ComplexMesh& m = *u.mesh;
  json faces = json::array();
  for (std::size_t t = 0; t < m.faces.size(); ++t) {
    json nodes = json::array();
    for (std::size_t i = 0; i < m.faces[t].nodes.size(); ++i) {
      const MeshNode& n = m.faces[t].nodes[i];
      nodes.push_back({n.p.x, n.p.y, u.image[t][i].x, u.image[t][i].y});
    }
    faces.push_back({{"nodes", nodes}});
  }
  json mesh = to_json(m.cfg);
  mesh["schedule"] = schedule;
  return {{"complex", to_json(spec)},
          {"sigma", to_json(m.sigma)},
          {"tau", to_json(u.tau)},
          {"mesh", mesh},
          {"faces", faces},
          {"edge_logy", u.edge_logy}};
}

/// Rebuilds the mesh from the recipe in the dump and checks that the stored
/// node positions match before taking the images.
inline SimplicialMap map_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidSpec, "map: not an object");
  const Complex c = build_complex(complex_from_json(j.value("complex", json())));
  const IdealMetric sigma = metric_from_json(c, j.value("sigma", json()));
  const IdealMetric tau = metric_from_json(c, j.value("tau", json()));
  const json& mj = j.value("mesh", json());
  MeshConfig mcfg = mesh_config_from_json(mj);
  const auto schedule = detail::get<std::vector<double>>(mj, "schedule", "map mesh");
  if (schedule.empty()) throw Error(ErrorKind::InvalidSpec, "map: empty schedule");
  mcfg.y_cut = schedule.front();
  ComplexMesh mesh = build_mesh(c, sigma, mcfg);
  for (std::size_t k = 1; k < schedule.size(); ++k) mesh = exhaust(mesh, schedule[k]);
  auto shared = std::make_shared<const ComplexMesh>(std::move(mesh));
  SimplicialMap u = initial_map(shared, tau);

  const json& faces = j.value("faces", json());
  if (!faces.is_array() || faces.size() != shared->faces.size())
    throw Error(ErrorKind::InvalidSpec, "map: face count does not match the complex");
  for (std::size_t t = 0; t < faces.size(); ++t) {
    const auto nodes = detail::get<std::vector<std::array<double, 4>>>(faces[t], "nodes", "map face");
    const auto& ref = shared->faces[t].nodes;
    if (nodes.size() != ref.size())
      throw Error(ErrorKind::InvalidSpec, "map: node count of face " + std::to_string(t) +
                                              " does not match the rebuilt mesh");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (std::abs(nodes[i][0] - ref[i].p.x) > 1e-12 * (1.0 + std::abs(ref[i].p.x)) ||
          std::abs(nodes[i][1] - ref[i].p.y) > 1e-12 * ref[i].p.y)
        throw Error(ErrorKind::InvalidSpec, "map: node " + std::to_string(i) + " of face " +
                                                std::to_string(t) + " differs from the rebuilt mesh");
      u.image[t][i] = {nodes[i][2], nodes[i][3]};
    }
  }
  const auto logy = detail::get<std::vector<double>>(j, "edge_logy", "map");
  if (logy.size() != shared->edge_nodes.size())
    throw Error(ErrorKind::InvalidSpec, "map: edge node count does not match the rebuilt mesh");
  u.edge_logy = logy;
  u.sync_edges();
  check_images(u);
  return u;
}

// ---- reports ----------------------------------------------------------------

inline json to_json(const EnergyReport& r) {
  json jac = json::array();
  for (double v : r.jacobian_trace) jac.push_back(number(v));
  return {{"total", r.total},
          {"per_face", r.per_face},
          {"stationarity", number(r.stationarity)},
          {"mode", std::string(1, r.mode)},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"line_search_failed", r.line_search_failed},
          {"min_jacobian", number(r.min_jacobian)},
          {"trace", r.trace},
          {"energy_trace", r.energy_trace},
          {"jacobian_trace", jac}};
}

inline json to_json(const DiagnosticsReport& d) {
  json edges = json::array();
  for (const EdgeBalance& e : d.edges)
    edges.push_back({{"edge", e.edge},
                     {"hopf_imbalance", e.hopf_imbalance},
                     {"strong_balance", e.strong_balance},
                     {"weak_balance", e.weak_balance},
                     {"weak_variation", e.weak_variation},
                     {"samples", e.profile.size()}});
  json bounds = json::array();
  for (const EdgePointBound& b : d.lipschitz.edge_points)
    bounds.push_back({{"edge", b.edge}, {"y", b.y}, {"dfdy2", b.dfdy2}, {"radius", b.radius},
                      {"bound", b.bound}});
  double strong = 0.0;
  for (const EdgeBalance& e : d.edges) strong = std::max(strong, e.strong_balance);
  double pde = 0.0;
  for (double v : d.pde_residual) pde += v * v;
  double minj = std::numeric_limits<double>::infinity();
  for (double v : d.min_jacobian) minj = std::min(minj, v);
  json mj = json::array();
  for (double v : d.min_jacobian) mj.push_back(number(v));
  return {{"seed", d.seed},
          {"energy", d.energy},
          {"hopf_max_abs", d.hopf_max_abs},
          {"hopf_max_norm", d.hopf_max_norm},
          {"hopf_dbar_norm", d.hopf_dbar_norm},
          {"hopf_dbar_per_face", d.hopf_dbar_per_face},
          {"pde_residual", std::sqrt(pde)},
          {"pde_residual_per_face", d.pde_residual},
          {"strong_balance_max", strong},
          {"min_jacobian", number(minj)},
          {"min_jacobian_per_face", mj},
          {"edges", edges},
          {"degree", {{"degree", d.degree.degree},
                      {"consistent", d.degree.consistent},
                      {"seed", d.degree.seed},
                      {"samples", d.degree.samples.size()}}},
          {"lipschitz", {{"y_interior", d.lipschitz.y_interior},
                         {"sup_density", d.lipschitz.sup_density},
                         {"energy", d.lipschitz.energy},
                         {"ratio", d.lipschitz.ratio},
                         {"edge_bound_holds", d.lipschitz.edge_bound_holds},
                         {"edge_points", bounds}}}};
}

}  // namespace ihm::io
