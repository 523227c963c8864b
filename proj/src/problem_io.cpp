#include "switchtime/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "switchtime/benchmarks.hpp"

namespace swto {

using nlohmann::json;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t idx) {
  return path + "/" + std::to_string(idx);
}

const json& require(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_object()) throw ProblemFormatError(path.empty() ? "/" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ProblemFormatError(child(path, key), "missing required field");
  return *it;
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ProblemFormatError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ProblemFormatError(path, "expected a finite number");
  return v;
}

int read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ProblemFormatError(path, "expected an integer");
  return j.get<int>();
}

Vector read_vector(const json& j, const std::string& path, Eigen::Index expected = -1,
                   bool allow_null_as_inf = false) {
  if (!j.is_array()) throw ProblemFormatError(path, "expected an array");
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected) {
    throw ProblemFormatError(path, "expected " + std::to_string(expected) + " entries, got " +
                                       std::to_string(j.size()));
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (allow_null_as_inf && j[k].is_null()) {
      v[static_cast<Eigen::Index>(k)] = std::numeric_limits<double>::infinity();
    } else {
      v[static_cast<Eigen::Index>(k)] = read_number(j[k], child(path, k));
    }
  }
  return v;
}

Matrix read_matrix(const json& j, const std::string& path, Eigen::Index n) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw ProblemFormatError(path, "expected a " + std::to_string(n) + "x" + std::to_string(n) +
                                       " matrix (array of rows)");
  }
  Matrix M(n, n);
  for (std::size_t r = 0; r < j.size(); ++r) {
    M.row(static_cast<Eigen::Index>(r)) = read_vector(j[r], child(path, r), n).transpose();
  }
  return M;
}

json write_vector(const Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::isinf(v[k])) {
      a.push_back(nullptr);
    } else {
      a.push_back(v[k]);
    }
  }
  return a;
}

json write_matrix(const Matrix& M) {
  json a = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) a.push_back(write_vector(M.row(r).transpose()));
  return a;
}

ModeSpec parse_mode(const json& j, const std::string& path, int n_x) {
  if (!j.is_object() || j.size() != 1) {
    throw ProblemFormatError(path, "mode must be an object with exactly one key");
  }
  ModeSpec spec;
  const std::string key = j.begin().key();
  const json& body = j.begin().value();
  const std::string bpath = child(path, key);
  if (key == "A") {
    spec.kind = "linear";
    spec.A = read_matrix(body, bpath, n_x);
    return spec;
  }
  auto param = [&](const char* name) {
    spec.params[name] = read_number(require(body, bpath, name), child(bpath, name));
  };
  if (key == "lotka_volterra") {
    if (n_x != 2) throw ProblemFormatError(path, "lotka_volterra needs n_x = 2");
    spec.kind = key;
    param("c1");
    param("c2");
    param("u");
  } else if (key == "double_tank") {
    if (n_x != 2) throw ProblemFormatError(path, "double_tank needs n_x = 2");
    spec.kind = key;
    param("u");
  } else {
    throw ProblemFormatError(path, "unknown mode type '" + key + "'");
  }
  return spec;
}

}  // namespace

ModeDynamics make_mode(const ModeSpec& spec) {
  if (spec.kind == "linear") return LinearMode{spec.A};
  if (spec.kind == "lotka_volterra") {
    return lotka_volterra_mode(spec.params.at("c1"), spec.params.at("c2"), spec.params.at("u"));
  }
  if (spec.kind == "double_tank") return double_tank_mode(spec.params.at("u"));
  throw std::invalid_argument("unknown mode type '" + spec.kind + "'");
}

SwitchedProblem build_problem(const ProblemDefinition& def) {
  std::vector<ModeDynamics> modes;
  modes.reserve(def.modes.size());
  for (const auto& m : def.modes) modes.push_back(make_mode(m));
  SwitchedProblem p = make_problem(std::move(modes), def.x0, def.Q, def.E, def.T, def.n_grid,
                                   def.lb, def.ub);
  if (def.reference) return augment_problem(p, *def.reference);
  return p;
}

ProblemDefinition parse_problem(const json& j) {
  ProblemDefinition def;
  def.n_x = read_int(require(j, "", "n_x"), "/n_x");
  if (def.n_x <= 0) throw ProblemFormatError("/n_x", "must be positive");
  const int n = def.n_x;

  const json& modes = require(j, "", "modes");
  if (!modes.is_array() || modes.empty()) {
    throw ProblemFormatError("/modes", "expected a non-empty array");
  }
  for (std::size_t k = 0; k < modes.size(); ++k) {
    def.modes.push_back(parse_mode(modes[k], child("/modes", k), n));
  }
  const auto m = static_cast<Eigen::Index>(def.modes.size());

  def.x0 = read_vector(require(j, "", "x0"), "/x0", n);
  def.Q = read_matrix(require(j, "", "Q"), "/Q", n);
  def.E = read_matrix(require(j, "", "E"), "/E", n);
  def.T = read_number(require(j, "", "T"), "/T");
  if (!(def.T > 0)) throw ProblemFormatError("/T", "must be positive");
  def.n_grid = read_int(require(j, "", "n_grid"), "/n_grid");
  if (def.n_grid < 2) throw ProblemFormatError("/n_grid", "must be at least 2");
  if (j.contains("lb")) def.lb = read_vector(j["lb"], "/lb", m);
  if (j.contains("ub")) def.ub = read_vector(j["ub"], "/ub", m, true);

  if (j.contains("reference")) {
    const json& r = j["reference"];
    ReferenceSignal ref;
    const json& tracked = require(r, "/reference", "tracked");
    if (!tracked.is_array()) throw ProblemFormatError("/reference/tracked", "expected an array");
    for (std::size_t k = 0; k < tracked.size(); ++k) {
      const int idx = read_int(tracked[k], child("/reference/tracked", k));
      if (idx < 0 || idx >= n) {
        throw ProblemFormatError(child("/reference/tracked", k), "component index out of range");
      }
      ref.tracked.push_back(idx);
    }
    const auto k = static_cast<Eigen::Index>(ref.tracked.size());
    ref.r0 = read_vector(require(r, "/reference", "r0"), "/reference/r0", k);
    ref.rdot = r.contains("rdot") ? read_vector(r["rdot"], "/reference/rdot", k)
                                  : Vector::Zero(k).eval();
    def.reference = std::move(ref);
  }
  return def;
}

json to_json(const ProblemDefinition& def) {
  json j;
  j["n_x"] = def.n_x;
  json modes = json::array();
  for (const auto& m : def.modes) {
    if (m.kind == "linear") {
      modes.push_back({{"A", write_matrix(m.A)}});
    } else {
      json params = json::object();
      for (const auto& [k, v] : m.params) params[k] = v;
      modes.push_back({{m.kind, params}});
    }
  }
  j["modes"] = modes;
  j["x0"] = write_vector(def.x0);
  j["Q"] = write_matrix(def.Q);
  j["E"] = write_matrix(def.E);
  j["T"] = def.T;
  j["n_grid"] = def.n_grid;
  if (def.lb) j["lb"] = write_vector(*def.lb);
  if (def.ub) j["ub"] = write_vector(*def.ub);
  if (def.reference) {
    j["reference"] = {{"r0", write_vector(def.reference->r0)},
                      {"rdot", write_vector(def.reference->rdot)},
                      {"tracked", def.reference->tracked}};
  }
  return j;
}

ProblemDefinition load_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProblemFormatError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(j);
}

void save_problem_file(const ProblemDefinition& def, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(def).dump(2) << '\n';
}

Vector load_delta_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open interval file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProblemFormatError("/", std::string("invalid JSON: ") + e.what());
  }
  if (j.is_object()) return read_vector(require(j, "", "delta"), "/delta");
  return read_vector(j, "");
}

}  // namespace swto
