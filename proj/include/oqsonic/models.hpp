// Copyright 2026 The oqsonic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Builders for the physical systems: heat-bath double well on a grid,
// boundary-driven XXZ chain, and the amplitude-damped qubit.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "oqsonic/operators.hpp"

namespace oqs {

// Effective Hamiltonian plus jump operators. `h_system` is the closed-system
// Hamiltonian (no bath terms) whose eigenbasis is used for sonification.
struct LindbladModel {
  Operator h_eff;
  std::vector<Operator> jumps;
  double hbar = 1.0;
  std::string label;
  Operator h_system;

  LindbladModel(Operator h, std::vector<Operator> l, double hb, std::string name)
      : LindbladModel(h, std::move(l), hb, std::move(name), h) {}

  LindbladModel(Operator h, std::vector<Operator> l, double hb, std::string name, Operator h0)
      : h_eff(std::move(h)), jumps(std::move(l)), hbar(hb), label(std::move(name)),
        h_system(std::move(h0)) {
    const double res = hermiticity_residue(h_eff.matrix());
    if (res > tol::kHermiticity) throw HermiticityError("effective Hamiltonian", res);
    h_eff.check_same(h_system);
    for (const auto& j : jumps) h_eff.check_same(j);
    if (!(hbar > 0.0)) throw InvalidParameter("hbar must be positive");
  }

  Index dim() const noexcept { return h_eff.dim(); }
};

// ---------------------------------------------------------------------------
// Grid discretization

struct GridSpec {
  Index n_points = 256;
  double x_max = 6.0;
  double mass = 1.0;

  void validate() const {
    if (n_points < 16) throw InvalidParameter("grid.n_points must be >= 16");
    if (!(x_max > 0.0)) throw InvalidParameter("grid.x_max must be positive");
    if (!(mass > 0.0)) throw InvalidParameter("grid.mass must be positive");
  }
  double spacing() const { return 2.0 * x_max / static_cast<double>(n_points - 1); }
  Eigen::VectorXd positions() const {
    Eigen::VectorXd x(n_points);
    const double h = spacing();
    for (Index i = 0; i < n_points; ++i) x(i) = -x_max + static_cast<double>(i) * h;
    return x;
  }
};

struct PositionOperators {
  Operator x;
  Operator p;
};

// X diagonal on the grid, P = -i hbar D with D the central first difference
// (Dirichlet). P is exactly Hermitian.
inline PositionOperators build_position_operators(const GridSpec& grid, double hbar = 1.0) {
  grid.validate();
  const Index n = grid.n_points;
  const double h = grid.spacing();
  Matrix p = Matrix::Zero(n, n);
  const Complex hop = -kI * hbar / (2.0 * h);
  for (Index i = 0; i + 1 < n; ++i) {
    p(i, i + 1) = hop;
    p(i + 1, i) = -hop;
  }
  return {Operator::diagonal(grid.positions()), Operator(std::move(p))};
}

// P^2/2m from the 3-point Laplacian. Squaring the central-difference P would
// decouple even and odd grid sites and double every level.
inline Operator build_kinetic(const GridSpec& grid, double mass, double hbar = 1.0) {
  grid.validate();
  const Index n = grid.n_points;
  const double h = grid.spacing();
  const double t = hbar * hbar / (2.0 * mass * h * h);
  Matrix k = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = 2.0 * t;
    if (i + 1 < n) {
      k(i, i + 1) = -t;
      k(i + 1, i) = -t;
    }
  }
  return Operator(std::move(k));
}

// ---------------------------------------------------------------------------
// Double well in a heat bath

struct DoubleWellParams {
  double c4 = 0.05;
  double c2 = 0.35;
  double gamma = 0.0;
  double kT = 1.0;
  double mass = 1.0;

  double potential(double x) const { return c4 * x * x * x * x - c2 * x * x; }
  // Location of the positive minimum, 0 for a single well.
  double minimum() const { return (c4 > 0.0 && c2 > 0.0) ? std::sqrt(c2 / (2.0 * c4)) : 0.0; }
  double barrier_height() const {
    return (c4 > 0.0 && c2 > 0.0) ? c2 * c2 / (4.0 * c4) : 0.0;
  }

  void validate() const {
    if (!(c4 >= 0.0)) throw InvalidParameter("c4 must be non-negative");
    if (c4 == 0.0 && !(c2 < 0.0)) {
      throw InvalidParameter("potential is not confining: need c4 > 0, or c4 = 0 with c2 < 0");
    }
    if (!(gamma >= 0.0)) throw InvalidParameter("gamma must be non-negative");
    if (!(mass > 0.0)) throw InvalidParameter("mass must be positive");
    if (gamma > 0.0 && !(kT > 0.0)) throw InvalidParameter("kT must be positive when gamma > 0");
  }
};

inline Operator double_well_system_hamiltonian(const GridSpec& grid,
                                               const DoubleWellParams& params,
                                               double hbar = 1.0) {
  params.validate();
  const Eigen::VectorXd x = grid.positions();
  Eigen::VectorXd v(x.size());
  for (Index i = 0; i < x.size(); ++i) v(i) = params.potential(x(i));
  return build_kinetic(grid, params.mass, hbar) + Operator::diagonal(v);
}

inline LindbladModel build_double_well(const GridSpec& grid, const DoubleWellParams& params,
                                       double hbar = 1.0) {
  params.validate();
  if (grid.mass != params.mass) {
    throw InvalidParameter("grid.mass and model mass disagree");
  }
  const auto [x, p] = build_position_operators(grid, hbar);
  Operator h0 = double_well_system_hamiltonian(grid, params, hbar);
  if (params.gamma == 0.0) {
    return LindbladModel(h0, {}, hbar, "double_well", h0);
  }
  const double g = params.gamma;
  const double m = params.mass;
  Operator h = h0 + Complex(g / 2.0) * anticommutator(x, p);
  const double cx = std::sqrt(4.0 * g * m * params.kT / hbar);
  const double cp = std::sqrt(g * hbar / (4.0 * m * params.kT));
  Operator jump = Complex(cx) * x + (kI * cp) * p;
  return LindbladModel(std::move(h), {std::move(jump)}, hbar, "double_well", std::move(h0));
}

// ---------------------------------------------------------------------------
// Spin chains. Per-site basis (up, down); site 1 is the leftmost factor.

namespace pauli {
inline Operator identity() { return Operator::identity(2); }
inline Operator x() { return Operator((Matrix(2, 2) << 0, 1, 1, 0).finished()); }
inline Operator y() { return Operator((Matrix(2, 2) << 0, -kI, kI, 0).finished()); }
inline Operator z() { return Operator((Matrix(2, 2) << 1, 0, 0, -1).finished()); }
// sigma+ |down> = |up>
inline Operator plus() { return Operator((Matrix(2, 2) << 0, 1, 0, 0).finished()); }
inline Operator minus() { return Operator((Matrix(2, 2) << 0, 0, 1, 0).finished()); }
}  // namespace pauli

inline constexpr int kMaxChainSites = 8;

// Embeds a single-site operator at `site` (0-based) of an n-site chain.
inline Operator site_operator(const Operator& op, int site, int n_sites) {
  if (site < 0 || site >= n_sites) throw DimensionError("site index out of range");
  Operator out = site == 0 ? op : pauli::identity();
  for (int k = 1; k < n_sites; ++k) out = kron(out, k == site ? op : pauli::identity());
  return out;
}

struct XXZParams {
  int n_sites = 4;
  double J = 1.0;
  double delta = 1.0;
  Complex alpha_l = 0.0;
  Complex beta_l = 1.0;
  Complex alpha_r = 0.0;
  Complex beta_r = 1.0;
  double r = 1.0;
  double phi = 0.0;

  void validate() const {
    if (n_sites < 2) throw InvalidParameter("n_sites must be >= 2");
    if (n_sites > kMaxChainSites) {
      throw ModelTooLarge("n_sites = " + std::to_string(n_sites) + " exceeds the dense limit of " +
                          std::to_string(kMaxChainSites));
    }
    if (!(r >= 0.0)) throw InvalidParameter("r must be non-negative");
  }
};

inline Operator xxz_hamiltonian(const XXZParams& p) {
  p.validate();
  const int n = p.n_sites;
  const Index dim = Index{1} << n;
  Operator h = Operator::zero(dim);
  const Operator id = Operator::identity(dim);
  for (int j = 0; j + 1 < n; ++j) {
    const Operator xx = site_operator(pauli::x(), j, n) * site_operator(pauli::x(), j + 1, n);
    const Operator yy = site_operator(pauli::y(), j, n) * site_operator(pauli::y(), j + 1, n);
    const Operator zz = site_operator(pauli::z(), j, n) * site_operator(pauli::z(), j + 1, n);
    h += xx + yy + Complex(p.delta) * (zz - id);
  }
  return Complex(p.J) * h;
}

// Boundary drives, taken term for term:
//   L_L = a_L (r s1- s1+) - b_L ((s1z - I)/2 - r s1-)
//   L_R = a_R (r e^{-i phi} sN- sN+) - b_R ((sNz - I)/2 - r e^{i phi} sN-)
inline std::pair<Operator, Operator> xxz_boundary_jumps(const XXZParams& p) {
  p.validate();
  const int n = p.n_sites;
  const Index dim = Index{1} << n;
  const Operator id = Operator::identity(dim);
  auto drive = [&](int site, Complex alpha, Complex beta, Complex first_phase,
                   Complex second_phase) {
    const Operator sm = site_operator(pauli::minus(), site, n);
    const Operator sp = site_operator(pauli::plus(), site, n);
    const Operator sz = site_operator(pauli::z(), site, n);
    return alpha * (Complex(p.r) * first_phase * (sm * sp)) -
           beta * (Complex(0.5) * (sz - id) - Complex(p.r) * second_phase * sm);
  };
  Operator left = drive(0, p.alpha_l, p.beta_l, 1.0, 1.0);
  Operator right = drive(n - 1, p.alpha_r, p.beta_r, std::exp(-kI * p.phi), std::exp(kI * p.phi));
  return {std::move(left), std::move(right)};
}

inline LindbladModel build_xxz_chain(const XXZParams& p, double hbar = 1.0) {
  Operator h = xxz_hamiltonian(p);
  auto [left, right] = xxz_boundary_jumps(p);
  return LindbladModel(h, {std::move(left), std::move(right)}, hbar, "xxz", h);
}

// H = 0, L = sqrt(gamma) sigma-: the closed-form amplitude-damping channel.
inline LindbladModel build_qubit_damping(double gamma, double hbar = 1.0) {
  if (!(gamma >= 0.0)) throw InvalidParameter("gamma must be non-negative");
  std::vector<Operator> jumps;
  if (gamma > 0.0) jumps.push_back(Complex(std::sqrt(gamma)) * pauli::minus());
  return LindbladModel(Operator::zero(2), std::move(jumps), hbar, "qubit_damping");
}

// ---------------------------------------------------------------------------

// Projects every operator of the model onto the lowest `rank` columns of
// `basis`: O -> U_r^dagger O U_r.
inline LindbladModel truncate_to_eigenbasis(const LindbladModel& model, const EnergyBasis& basis,
                                            Index rank) {
  if (rank < 2) throw InvalidParameter("truncation rank must be >= 2");
  if (rank > model.dim() || basis.dim() != model.dim()) {
    throw DimensionError("truncation rank " + std::to_string(rank) +
                         " incompatible with model dim " + std::to_string(model.dim()));
  }
  const Matrix u = basis.vectors.leftCols(rank);
  auto project = [&](const Operator& o) { return Matrix(u.adjoint() * o.matrix() * u); };
  auto hermitian = [&](const Operator& o) {
    const Matrix m = project(o);
    return Operator(0.5 * (m + m.adjoint()));
  };
  std::vector<Operator> jumps;
  jumps.reserve(model.jumps.size());
  for (const auto& j : model.jumps) jumps.emplace_back(project(j));
  return LindbladModel(hermitian(model.h_eff), std::move(jumps), model.hbar, model.label,
                       hermitian(model.h_system));
}

// Projects an arbitrary operator onto the truncated basis (observables).
inline Operator project_operator(const Operator& o, const EnergyBasis& basis, Index rank) {
  const Matrix u = basis.vectors.leftCols(rank);
  return Operator(u.adjoint() * o.matrix() * u);
}

}  // namespace oqs
