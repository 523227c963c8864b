// JSON problem files.
//
//   {
//     "n_x": 2,
//     "modes": [ { "A": [[-1, 0], [1, 2]] },
//                { "lotka_volterra": { "c1": 0.4, "c2": 0.2, "u": 1 } },
//                { "double_tank": { "u": 2 } } ],
//     "x0": [0.5, 0.7],
//     "Q": [[1, 0], [0, 1]],
//     "E": [[0, 0], [0, 0]],
//     "T": 12,
//     "n_grid": 200,
//     "lb": [0, ...],                  optional
//     "ub": [null, ...],               optional, null = unbounded
//     "reference": { "r0": [1, 1], "rdot": [0, 0], "tracked": [0, 1] }   optional
//   }

#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchtime/problem.hpp"

namespace swto {

/// Schema violation, tagged with the JSON pointer of the offending field.
class ProblemFormatError : public std::runtime_error {
 public:
  ProblemFormatError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ModeSpec {
  std::string kind;  // "linear", "lotka_volterra" or "double_tank"
  Matrix A;          // linear only
  std::map<std::string, double> params;
};

/// Serializable description of a problem, before reference augmentation.
struct ProblemDefinition {
  int n_x = 0;
  std::vector<ModeSpec> modes;
  Vector x0;
  Matrix Q;
  Matrix E;
  double T = 1.0;
  int n_grid = 2;
  std::optional<Vector> lb;
  std::optional<Vector> ub;
  std::optional<ReferenceSignal> reference;
};

ModeDynamics make_mode(const ModeSpec& spec);

/// Builds the problem and applies the reference augmentation if present.
SwitchedProblem build_problem(const ProblemDefinition& def);

ProblemDefinition parse_problem(const nlohmann::json& j);
nlohmann::json to_json(const ProblemDefinition& def);

ProblemDefinition load_problem_file(const std::filesystem::path& path);
void save_problem_file(const ProblemDefinition& def, const std::filesystem::path& path);

/// Plain JSON array of durations, or an object with a "delta" array.
Vector load_delta_file(const std::filesystem::path& path);

}  // namespace swto
