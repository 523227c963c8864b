#include "switchtime/benchmarks.hpp"

#include <cmath>
#include <stdexcept>

namespace swto {

NonlinearMode lotka_volterra_mode(double c1, double c2, double u) {
  NonlinearMode m;
  m.f = [=](const Vector& x) {
    Vector dx(2);
    dx << x[0] - x[0] * x[1] - c1 * x[0] * u, -x[1] + x[0] * x[1] - c2 * x[1] * u;
    return dx;
  };
  m.jacobian = [=](const Vector& x) {
    Matrix J(2, 2);
    J << 1.0 - x[1] - c1 * u, -x[0], x[1], -1.0 + x[0] - c2 * u;
    return J;
  };
  return m;
}

NonlinearMode double_tank_mode(double u) {
  NonlinearMode m;
  m.f = [=](const Vector& x) {
    Vector dx(2);
    dx << -std::sqrt(x[0]) + u, std::sqrt(x[0]) - std::sqrt(x[1]);
    return dx;
  };
  m.jacobian = [](const Vector& x) {
    Matrix J(2, 2);
    const double s1 = std::sqrt(x[0]);
    const double s2 = std::sqrt(x[1]);
    J << -0.5 / s1, 0.0, 0.5 / s1, -0.5 / s2;
    return J;
  };
  return m;
}

ProblemDefinition unstable_linear_definition() {
  ProblemDefinition def;
  def.n_x = 2;
  Matrix A1(2, 2), A2(2, 2);
  A1 << -1, 0, 1, 2;
  A2 << 1, 1, 1, -2;
  for (int i = 0; i < 6; ++i) def.modes.push_back({"linear", i % 2 == 0 ? A1 : A2, {}});
  def.x0 = Vector::Ones(2);
  def.Q = Matrix::Identity(2, 2);
  def.E = Matrix::Zero(2, 2);
  def.T = 1.0;
  def.n_grid = 2;
  return def;
}

ProblemDefinition fishing_definition(int n_grid) {
  ProblemDefinition def;
  def.n_x = 2;
  for (int i = 0; i < 9; ++i) {
    def.modes.push_back({"lotka_volterra", {}, {{"c1", 0.4}, {"c2", 0.2}, {"u", i % 2 == 0 ? 0.0 : 1.0}}});
  }
  def.x0 = Vector(2);
  def.x0 << 0.5, 0.7;
  def.Q = Matrix::Identity(2, 2);
  def.E = Matrix::Zero(2, 2);
  def.T = 12.0;
  def.n_grid = n_grid;
  def.reference = ReferenceSignal{Vector::Ones(2), Vector::Zero(2), {0, 1}};
  return def;
}

ProblemDefinition tank_definition(int n_grid) {
  ProblemDefinition def;
  def.n_x = 2;
  for (int i = 0; i < 16; ++i) {
    def.modes.push_back({"double_tank", {}, {{"u", i % 2 == 0 ? 3.0 : 2.0}}});
  }
  def.x0 = Vector::Constant(2, 2.0);
  def.Q = Matrix::Zero(2, 2);
  def.Q(1, 1) = 1.0;
  def.E = Matrix::Zero(2, 2);
  def.T = 10.0;
  def.n_grid = n_grid;
  def.reference = ReferenceSignal{Vector::Constant(1, 3.0), Vector::Constant(1, -0.5), {1}};
  return def;
}

std::vector<std::string> builtin_names() { return {"unstable-linear", "fishing", "tank"}; }

ProblemDefinition builtin_definition(const std::string& name) {
  if (name == "unstable-linear") return unstable_linear_definition();
  if (name == "fishing") return fishing_definition();
  if (name == "tank") return tank_definition();
  throw std::invalid_argument("unknown builtin problem '" + name + "'");
}

int builtin_max_iter(const std::string& name) {
  if (name == "fishing") return 20;
  if (name == "tank") return 15;
  if (name == "unstable-linear") return 100;
  throw std::invalid_argument("unknown builtin problem '" + name + "'");
}

}  // namespace swto
