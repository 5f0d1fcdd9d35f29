#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qlga/spectral.hpp"

using namespace qlga;
using std::numbers::pi;

namespace {

std::vector<double> sorted_phases(const Eigen::VectorXcd& ev) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back(std::arg(ev(i)));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Eigendecompose, Identity) {
  const auto es = eigendecompose(UnitaryOperator(Matrix::Identity(5, 5)));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(std::abs(es.eigenvalues(i) - 1.0), 0.0, 1e-14);
}

TEST(Eigendecompose, DiagonalPhases) {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = cplx(0.0, 1.0);
  d(2, 2) = -1.0;
  const auto ph = sorted_phases(eigendecompose(UnitaryOperator(d)).eigenvalues);
  EXPECT_NEAR(ph[0], 0.0, 1e-14);
  EXPECT_NEAR(ph[1], pi / 2, 1e-14);
  EXPECT_NEAR(std::abs(ph[2]), pi, 1e-14);
}

TEST(Eigendecompose, FreeModelMatchesFourierBlocks) {
  const int l = 12;
  const double theta = 0.7;
  QlgaModel model;
  model.lattice = LatticeSpec(1, l);
  model.collision = Collision1DParams(theta, 1.0);
  const auto es = eigendecompose(step_matrix(model, 1));
  EXPECT_LE(es.max_residual(), 1e-9);

  // Independent closed form: eigenvalues of [[q e^{-ik}, p e^{ik}], [p e^{-ik}, q e^{ik}]]
  // have trace 2 cos(theta) cos(k) and determinant q^2 - p^2 = 1.
  std::vector<cplx> expected;
  for (int j = 0; j < l; ++j) {
    const double k = 2 * pi * j / l;
    const cplx tr = 2.0 * std::cos(theta) * std::cos(k);
    const cplx disc = std::sqrt(tr * tr - 4.0);
    expected.push_back(0.5 * (tr + disc));
    expected.push_back(0.5 * (tr - disc));
  }
  std::vector<bool> used(expected.size(), false);
  for (Eigen::Index i = 0; i < es.size(); ++i) {
    double best = 1e9;
    std::size_t arg = 0;
    for (std::size_t e = 0; e < expected.size(); ++e) {
      if (used[e]) continue;
      const double d = std::abs(es.eigenvalues(i) - expected[e]);
      if (d < best) best = d, arg = e;
    }
    used[arg] = true;
    EXPECT_LE(best, 1e-10);
  }
}

TEST(Eigendecompose, CompletenessAndOrthonormality) {
  QlgaModel model;
  model.lattice = LatticeSpec(1, 10);
  model.collision = Collision1DParams(0.4, 1.0);
  model.eps = 0.5;
  model.potential = quadratic_potential(0.5, 0.5);
  const auto es = eigendecompose(step_matrix(model, 1));
  const Matrix& v = es.eigenvectors;
  const Matrix proj = v * v.adjoint();
  EXPECT_LE((proj - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-8);
  for (Eigen::Index i = 0; i < es.size(); ++i) EXPECT_NEAR(std::abs(std::abs(es.eigenvalues(i)) - 1.0), 0.0, 1e-9);
}

TEST(Eigendecompose, CapacityGuard) {
  EXPECT_THROW(eigendecompose(UnitaryOperator(Matrix::Identity(9, 9)), kEigenTol, 8), CapacityError);
  EXPECT_NO_THROW(eigendecompose(UnitaryOperator(Matrix::Identity(8, 8)), kEigenTol, 8));
  EXPECT_EQ(kMaxDiagonalizeDim, 4096);
}

TEST(EnergyConversion, Definition) {
  const cplx g = std::polar(1.0, 0.9);
  EXPECT_EQ(eigenphase_to_energy(g, g, 0.5), 0.0);
  const double eps = 0.5;
  EXPECT_NEAR(eigenphase_to_energy(g * std::polar(1.0, -eps * eps * 3.0), g, eps), 3.0, 1e-13);
  // branch edge: a half-turn maps to the closed upper end of (-pi/eps^2, pi/eps^2]
  EXPECT_NEAR(eigenphase_to_energy(-g, g, 1.0), pi, 1e-12);
  EXPECT_NEAR(eigenphase_to_energy(-1.0, 1.0, 0.5), 4.0 * pi, 1e-12);
  EXPECT_THROW(eigenphase_to_energy(2.0, g, 1.0), InvalidArgument);
  EXPECT_THROW(eigenphase_to_energy(g, g, 0.0), InvalidArgument);
}

TEST(Oscillator, LadderAtSixtyFourSites) {
  OscillatorConfig cfg;
  cfg.l_sites = 64;
  cfg.eps = 10.0 / 64;
  cfg.levels = 5;
  const auto rep = oscillator_eigenstate_experiment(cfg);
  ASSERT_EQ(rep.states.size(), 5u);
  std::vector<double> e;
  for (const auto& s : rep.states) e.push_back(s.energy);
  std::sort(e.begin(), e.end());
  for (int i = 1; i < 4; ++i) {
    const double ratio = (e[i + 1] - e[i]) / (e[1] - e[0]);
    EXPECT_NEAR(ratio, 1.0, 0.10) << "gap " << i;
  }
  EXPECT_NEAR(e[0], 0.5 * rep.omega, 0.05);
}

TEST(Oscillator, ReferenceConfigurationRegression) {
  for (int l : {8, 16}) {
    OscillatorConfig cfg;
    cfg.l_sites = l;
    cfg.eps = 5.0 / l;
    cfg.levels = 2;
    const auto rep = oscillator_eigenstate_experiment(cfg);
    ASSERT_EQ(rep.states.size(), 2u);
    EXPECT_EQ(rep.states[0].nodes, 0) << "l=" << l;
    EXPECT_EQ(rep.states[1].nodes, 1) << "l=" << l;
    EXPECT_GE(rep.eigenvalues.size(), static_cast<std::size_t>(l));
    if (l == 16) {
      EXPECT_GE(rep.states[0].overlap, 0.98);
      EXPECT_GE(rep.states[1].overlap, 0.95);
    }
  }
}

TEST(Oscillator, WellResolvedStateCountGrowsWithLattice) {
  int previous = -1;
  for (int l : {8, 16, 32, 64}) {
    OscillatorConfig cfg;
    cfg.l_sites = l;
    cfg.eps = 5.0 / l;
    cfg.levels = 12;
    const auto rep = oscillator_eigenstate_experiment(cfg);
    int good = 0;
    for (const auto& s : rep.states) good += s.overlap >= 0.95;
    EXPECT_GE(good, previous) << "l=" << l;
    previous = good;
  }
  EXPECT_GE(previous, 4);
}

TEST(Oscillator, Validation) {
  OscillatorConfig cfg;
  cfg.l_sites = 7;
  EXPECT_THROW(oscillator_eigenstate_experiment(cfg), InvalidArgument);
  cfg.l_sites = 8;
  cfg.levels = 0;
  EXPECT_THROW(oscillator_eigenstate_experiment(cfg), InvalidArgument);
}

TEST(CountNodes, IgnoresTails) {
  EXPECT_EQ(count_nodes({0.001, -0.001, 0.5, 1.0, 0.5, -0.001}), 0);
  EXPECT_EQ(count_nodes({-0.5, -1.0, 0.0, 1.0, 0.5}), 1);
}
