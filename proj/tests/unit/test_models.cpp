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

#include <gtest/gtest.h>

#include <random>

#include "oqsonic/models.hpp"
#include "test_support.hpp"

using namespace oqs;

namespace {

// Reference values from an independent numpy diagonalization of the same
// 3-point finite-difference Hamiltonian (n = 256, x_max = 6).
constexpr double kRefE0 = -1.91994843e-01;
constexpr double kRefE1 = 6.35125742e-04;
constexpr double kRefE2 = 6.93122089e-01;

Matrix site_reversal(int n) {
  const Index dim = Index{1} << n;
  Matrix perm = Matrix::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    Index j = 0;
    for (int b = 0; b < n; ++b) {
      if (i & (Index{1} << b)) j |= Index{1} << (n - 1 - b);
    }
    perm(j, i) = 1.0;
  }
  return perm;
}

double parity_residue(const Vector& v) {
  const Vector rev = v.reverse();
  return std::min((v - rev).cwiseAbs().maxCoeff(), (v + rev).cwiseAbs().maxCoeff());
}

}  // namespace

TEST(Grid, PositionOperatorsSmallExample) {
  GridSpec g;
  g.n_points = 16;
  g.x_max = 1.0;
  const auto [x, p] = build_position_operators(g);
  EXPECT_DOUBLE_EQ(x(0, 0).real(), -1.0);
  EXPECT_DOUBLE_EQ(x(15, 15).real(), 1.0);
  EXPECT_NEAR(x(1, 1).real(), -1.0 + 2.0 / 15.0, 1e-15);
  EXPECT_EQ(hermiticity_residue(p.matrix()), 0.0);
  EXPECT_EQ(hermiticity_residue(x.matrix()), 0.0);
}

TEST(Grid, ThreePointPositionsMatchUniformSpacing) {
  // The builder rejects fewer than 16 points, so check the n = 3 layout directly.
  GridSpec g;
  g.n_points = 3;
  g.x_max = 1.0;
  EXPECT_THROW(g.validate(), InvalidParameter);
  const Eigen::VectorXd x = g.positions();
  EXPECT_DOUBLE_EQ(x(0), -1.0);
  EXPECT_DOUBLE_EQ(x(1), 0.0);
  EXPECT_DOUBLE_EQ(x(2), 1.0);
}

TEST(Grid, CanonicalCommutatorIsSecondOrderOnSmoothStates) {
  auto residue = [](Index n) {
    GridSpec g;
    g.n_points = n;
    g.x_max = 6.0;
    const auto [x, p] = build_position_operators(g);
    const Eigen::VectorXd xs = g.positions();
    Vector f(n);
    for (Index i = 0; i < n; ++i) f(i) = std::exp(-xs(i) * xs(i));
    const Vector c = commutator(x, p).matrix() * f - kI * f;
    return c.segment(1, n - 2).cwiseAbs().maxCoeff();
  };
  const double r128 = residue(128);
  const double r256 = residue(256);
  EXPECT_LT(r256, 1e-2);
  EXPECT_GT(r128 / r256, 3.5);
  EXPECT_LT(r128 / r256, 4.5);
}

TEST(DoubleWell, ClosedSystemHasNoJumps) {
  const LindbladModel m = build_double_well(GridSpec{}, DoubleWellParams{});
  EXPECT_TRUE(m.jumps.empty());
  EXPECT_EQ(m.dim(), 256);
  EXPECT_EQ(m.h_eff, m.h_system);
}

TEST(DoubleWell, ReferencePotentialGeometry) {
  const DoubleWellParams p;
  EXPECT_NEAR(p.minimum(), std::sqrt(3.5), 1e-15);
  EXPECT_NEAR(p.minimum(), 1.8708, 1e-4);
  EXPECT_NEAR(p.barrier_height(), 0.6125, 1e-15);

  // Scan V on a fine grid as an independent check of the calculus.
  double best_x = 0.0, best_v = 1e300;
  for (int i = 0; i <= 600000; ++i) {
    const double x = 6.0 * i / 600000.0;
    if (p.potential(x) < best_v) {
      best_v = p.potential(x);
      best_x = x;
    }
  }
  EXPECT_NEAR(best_x, 1.8708, 1e-4);
  EXPECT_NEAR(p.potential(0.0) - best_v, 0.6125, 1e-9);
}

TEST(DoubleWell, EigenvectorsHaveDefiniteParity) {
  const LindbladModel m = build_double_well(GridSpec{}, DoubleWellParams{});
  const EnergyBasis b = hermitian_eig(m.h_eff);
  for (Index n = 0; n < 20; ++n) EXPECT_LE(parity_residue(b.vectors.col(n)), 1e-8) << n;
  // The doublet members have opposite parity.
  const Vector v0 = b.vectors.col(0), v1 = b.vectors.col(1);
  EXPECT_LE((v0 - v0.reverse()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((v1 + v1.reverse()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(DoubleWell, ReferenceSpectrumMatchesReferenceDiagonalization) {
  const LindbladModel m = build_double_well(GridSpec{}, DoubleWellParams{});
  const EnergyBasis b = hermitian_eig(m.h_eff);
  EXPECT_NEAR(b.energies(0), kRefE0, 1e-8);
  EXPECT_NEAR(b.energies(1), kRefE1, 1e-8);
  EXPECT_NEAR(b.energies(2), kRefE2, 1e-8);
  const double ratio = (b.energies(1) - b.energies(0)) / (b.energies(2) - b.energies(1));
  EXPECT_NEAR(ratio, 0.27817, 1e-4);
}

TEST(DoubleWell, DeeperWellGivesTighterDoublet) {
  DoubleWellParams p;
  p.c2 = 0.5;
  const EnergyBasis b = hermitian_eig(build_double_well(GridSpec{}, p).h_eff);
  const double ratio = (b.energies(1) - b.energies(0)) / (b.energies(2) - b.energies(1));
  EXPECT_LT(ratio, 0.2);
  EXPECT_NEAR(b.energies(1) - b.energies(0), 0.0561961, 1e-6);
}

TEST(DoubleWell, CombinationsLocalizeInOppositeWells) {
  const GridSpec g;
  const DoubleWellParams p;
  const EnergyBasis b = hermitian_eig(build_double_well(g, p).h_eff);
  const auto [x, unused] = build_position_operators(g);
  const StateVector plus(Vector(b.vectors.col(0) + b.vectors.col(1)));
  const StateVector minus(Vector(b.vectors.col(0) - b.vectors.col(1)));
  const double xp = expectation(plus, x).real();
  const double xm = expectation(minus, x).real();
  EXPECT_LT(xp * xm, 0.0);
  EXPECT_GT(std::abs(xp), 0.5 * p.minimum());
  EXPECT_GT(std::abs(xm), 0.5 * p.minimum());
  EXPECT_NEAR(std::abs(xp), 1.43893, 1e-4);
}

TEST(DoubleWell, GridConvergenceOfTunnellingGap) {
  GridSpec fine;
  fine.n_points = 512;
  const EnergyBasis a = hermitian_eig(build_double_well(GridSpec{}, DoubleWellParams{}).h_eff);
  const EnergyBasis b = hermitian_eig(build_double_well(fine, DoubleWellParams{}).h_eff);
  const double ga = a.energies(1) - a.energies(0);
  const double gb = b.energies(1) - b.energies(0);
  EXPECT_LT(std::abs(ga - gb) / gb, 0.01);
}

TEST(DoubleWell, DissipativeTermsMatchDefinition) {
  GridSpec g;
  g.n_points = 32;
  DoubleWellParams p;
  p.gamma = 0.1;
  p.kT = 0.7;
  const LindbladModel m = build_double_well(g, p);
  ASSERT_EQ(m.jumps.size(), 1u);
  const auto [x, pp] = build_position_operators(g);
  const Operator expected_l = Complex(std::sqrt(4.0 * 0.1 * 0.7)) * x +
                              Complex(0.0, std::sqrt(0.1 / (4.0 * 0.7))) * pp;
  EXPECT_LE(max_norm(m.jumps[0].matrix() - expected_l.matrix()), 1e-15);
  const Matrix xp = x.matrix() * pp.matrix();
  const Matrix expected_h = m.h_system.matrix() + 0.05 * (xp + xp.adjoint());
  EXPECT_LE(max_norm(m.h_eff.matrix() - expected_h), 1e-14);
  EXPECT_LE(hermiticity_residue(m.h_eff.matrix()), 1e-15);
}

TEST(DoubleWell, RandomParametersGiveHermitianHamiltonians) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  GridSpec g;
  g.n_points = 64;
  for (int i = 0; i < 20; ++i) {
    DoubleWellParams p;
    p.c4 = u(rng);
    p.c2 = u(rng);
    p.gamma = u(rng);
    p.kT = u(rng);
    const LindbladModel m = build_double_well(g, p);
    EXPECT_LE(hermiticity_residue(m.h_eff.matrix()), tol::kHermiticity);
  }
}

TEST(DoubleWell, RejectsInvalidParameters) {
  DoubleWellParams p;
  p.gamma = 0.1;
  p.kT = 0.0;
  EXPECT_THROW(build_double_well(GridSpec{}, p), InvalidParameter);
  p.kT = -1.0;
  EXPECT_THROW(build_double_well(GridSpec{}, p), InvalidParameter);
  DoubleWellParams flat;
  flat.c4 = 0.0;
  flat.c2 = 0.3;
  EXPECT_THROW(build_double_well(GridSpec{}, flat), InvalidParameter);
  GridSpec tiny;
  tiny.n_points = 8;
  EXPECT_THROW(build_double_well(tiny, DoubleWellParams{}), InvalidParameter);
}

TEST(DoubleWell, HarmonicLadderAfterTruncation) {
  DoubleWellParams p;
  p.c4 = 0.0;
  p.c2 = -0.5;  // V = 0.5 x^2, omega = sqrt(2 * 0.5 / m) = 1
  const GridSpec g;
  const LindbladModel full = build_double_well(g, p);
  const EnergyBasis b = hermitian_eig(full.h_eff);
  const LindbladModel t = truncate_to_eigenbasis(full, b, 8);
  const EnergyBasis tb = hermitian_eig(t.h_eff);
  const double omega = std::sqrt(2.0 * 0.5);
  for (Index n = 1; n < 8; ++n) {
    EXPECT_NEAR(tb.energies(n) - tb.energies(n - 1), omega, 0.02 * omega);
  }
  EXPECT_NEAR(tb.energies(0), 0.5 * omega, 0.02 * omega);
}

TEST(Xxz, TwoSiteSpectrum) {
  XXZParams p;
  p.n_sites = 2;
  const LindbladModel m = build_xxz_chain(p);
  EXPECT_EQ(m.dim(), 4);
  const EnergyBasis b = hermitian_eig(m.h_eff);
  EXPECT_NEAR(b.energies(0), -4.0, 1e-12);
  for (Index n = 1; n < 4; ++n) EXPECT_NEAR(b.energies(n), 0.0, 1e-12);
}

TEST(Xxz, HamiltonianMatchesHandBuiltTwoSiteMatrix) {
  XXZParams p;
  p.n_sites = 2;
  p.J = 0.7;
  p.delta = 0.3;
  // Basis |uu>, |ud>, |du>, |dd>: xx + yy hops |ud> <-> |du> with amplitude 2.
  Matrix h = Matrix::Zero(4, 4);
  h(1, 2) = h(2, 1) = 2.0;
  h(1, 1) = h(2, 2) = -2.0 * p.delta;
  h *= p.J;
  EXPECT_LE(max_norm(xxz_hamiltonian(p).matrix() - h), 1e-15);
}

TEST(Xxz, ZeroRDriveIsSiteOneProjector) {
  XXZParams p;
  p.n_sites = 3;
  p.r = 0.0;
  p.alpha_l = 0.4;
  p.beta_l = 1.7;
  const auto [left, right] = xxz_boundary_jumps(p);
  Eigen::VectorXd down(2);
  down << 0.0, 1.0;
  const Operator expected =
      Complex(1.7) * kron(kron(Operator::diagonal(down), pauli::identity()), pauli::identity());
  EXPECT_LE(max_norm(left.matrix() - expected.matrix()), 1e-15);
}

TEST(Xxz, MirrorSymmetricDrivesAtZeroTwist) {
  XXZParams p;
  p.n_sites = 4;
  p.phi = 0.0;
  p.r = 0.8;
  p.alpha_l = p.alpha_r = Complex(0.3, 0.2);
  p.beta_l = p.beta_r = 1.4;
  const auto [left, right] = xxz_boundary_jumps(p);
  const Matrix perm = site_reversal(4);
  EXPECT_LE(max_norm(perm * left.matrix() * perm.adjoint() - right.matrix()), 1e-15);
}

TEST(Xxz, DriveFollowsDefinitionWithTwist) {
  XXZParams p;
  p.n_sites = 2;
  p.r = 0.6;
  p.phi = 0.9;
  p.alpha_r = Complex(0.5, -0.1);
  p.beta_r = 2.0;
  const auto [left, right] = xxz_boundary_jumps(p);
  // Right site is the second factor; single-site matrices in (up, down).
  const Matrix sm = (Matrix(2, 2) << 0, 0, 1, 0).finished();
  const Matrix sp = sm.adjoint();
  const Matrix sz = (Matrix(2, 2) << 1, 0, 0, -1).finished();
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix site = p.alpha_r * (p.r * std::exp(Complex(0, -p.phi)) * (sm * sp)) -
                      p.beta_r * (0.5 * (sz - id) - p.r * std::exp(Complex(0, p.phi)) * sm);
  const Operator expected = kron(pauli::identity(), Operator(site));
  EXPECT_LE(max_norm(right.matrix() - expected.matrix()), 1e-15);
}

TEST(Xxz, MagnetizationConservedWithoutDrives) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 2; n <= 6; ++n) {
    XXZParams p;
    p.n_sites = n;
    p.J = u(rng);
    p.delta = u(rng);
    const Operator h = xxz_hamiltonian(p);
    EXPECT_LE(hermiticity_residue(h.matrix()), tol::kHermiticity);
    Operator mz = Operator::zero(Index{1} << n);
    for (int j = 0; j < n; ++j) mz += site_operator(pauli::z(), j, n);
    EXPECT_LE(max_norm(commutator(mz, h).matrix()), 1e-10);
  }
}

TEST(Xxz, SizeLimits) {
  XXZParams p;
  p.n_sites = 9;
  EXPECT_THROW(build_xxz_chain(p), ModelTooLarge);
  p.n_sites = 1;
  EXPECT_THROW(build_xxz_chain(p), InvalidParameter);
  p.n_sites = 8;
  EXPECT_EQ(xxz_hamiltonian(p).dim(), 256);
}

TEST(Truncation, FullRankPreservesSpectrum) {
  XXZParams p;
  p.n_sites = 3;
  p.delta = 0.4;
  const LindbladModel m = build_xxz_chain(p);
  const EnergyBasis b = hermitian_eig(m.h_system);
  const LindbladModel t = truncate_to_eigenbasis(m, b, m.dim());
  const EnergyBasis tb = hermitian_eig(t.h_eff);
  EXPECT_LE((tb.energies - b.energies).cwiseAbs().maxCoeff(), 1e-8);
  ASSERT_EQ(t.jumps.size(), 2u);
  const Matrix& u = b.vectors;
  EXPECT_LE(max_norm(u * t.jumps[0].matrix() * u.adjoint() - m.jumps[0].matrix()), 1e-12);
}

TEST(Truncation, GroundStateKeepsFullTrace) {
  GridSpec g;
  g.n_points = 64;
  const LindbladModel m = build_double_well(g, DoubleWellParams{});
  const EnergyBasis b = hermitian_eig(m.h_eff);
  const Matrix rho = b.vectors.col(0) * b.vectors.col(0).adjoint();
  const Matrix u = b.vectors.leftCols(4);
  EXPECT_NEAR((u.adjoint() * rho * u).trace().real(), 1.0, 1e-10);
}

TEST(Truncation, TraceNonIncreasing) {
  std::mt19937_64 rng(13);
  GridSpec g;
  g.n_points = 32;
  const EnergyBasis b = hermitian_eig(build_double_well(g, DoubleWellParams{}).h_eff);
  for (Index rank = 2; rank <= 32; rank += 6) {
    const Matrix rho = oqs::testing::random_density(32, rng);
    const Matrix u = b.vectors.leftCols(rank);
    EXPECT_LE((u.adjoint() * rho * u).trace().real(), 1.0 + 1e-12);
  }
}

TEST(Truncation, RejectsBadRank) {
  const LindbladModel m = build_qubit_damping(1.0);
  const EnergyBasis b = hermitian_eig(pauli::z());
  EXPECT_THROW(truncate_to_eigenbasis(m, b, 1), InvalidParameter);
  EXPECT_THROW(truncate_to_eigenbasis(m, b, 3), DimensionError);
}

TEST(Qubit, DampingModel) {
  const LindbladModel m = build_qubit_damping(0.25);
  ASSERT_EQ(m.jumps.size(), 1u);
  EXPECT_LE(max_norm(m.jumps[0].matrix() - 0.5 * pauli::minus().matrix()), 1e-16);
  EXPECT_TRUE(build_qubit_damping(0.0).jumps.empty());
  EXPECT_THROW(build_qubit_damping(-1.0), InvalidParameter);
}

TEST(LindbladModel, ValidatesComponents) {
  EXPECT_THROW(LindbladModel(pauli::plus(), {}, 1.0, "bad"), HermiticityError);
  EXPECT_THROW(LindbladModel(pauli::z(), {Operator::identity(3)}, 1.0, "bad"), DimensionError);
  EXPECT_THROW(LindbladModel(pauli::z(), {}, 0.0, "bad"), InvalidParameter);
}
