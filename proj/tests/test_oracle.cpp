#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qlga/oracle.hpp"

using namespace qlga;
using namespace qlga::oracle;
using std::numbers::pi;

namespace {

QlgaModel free_model(double theta) {
  QlgaModel m;
  m.lattice = LatticeSpec(1, 16);
  m.collision = Collision1DParams(theta, 1.0);
  return m;
}

cplx packet_at(double x, double t, const WavepacketParams& p, double mass) {
  const double xs[1] = {x};
  return free_gaussian(xs, t, p, mass);
}

}  // namespace

TEST(FreeGaussian, InitialPacket) {
  const WavepacketParams p{{1.5}, 2.0, {0.7}};
  const double norm = std::pow(2 * pi * 4.0, -0.25);
  for (double x = -6.0; x <= 9.0; x += 0.75) {
    const cplx expected = norm * std::exp(-(x - 1.5) * (x - 1.5) / 16.0) * std::polar(1.0, 0.7 * x);
    EXPECT_NEAR(std::abs(packet_at(x, 0.0, p, 1.3) - expected), 0.0, 1e-15);
  }
}

TEST(FreeGaussian, ProbabilityConservedByQuadrature) {
  const WavepacketParams p{{0.0}, 1.5, {1.0}};
  for (double t : {0.0, 1.0, 5.0, 20.0}) {
    double sum = 0.0;
    const double h = 0.01;
    for (double x = -200.0; x <= 200.0; x += h) sum += std::norm(packet_at(x, t, p, 0.8)) * h;
    EXPECT_NEAR(sum, 1.0, 1e-8) << "t = " << t;
  }
}

TEST(FreeGaussian, SatisfiesSchroedingerEquation) {
  const WavepacketParams p{{0.5}, 1.2, {0.9}};
  const double m = 1.7;
  const double h = 1e-2;
  for (double t : {0.3, 2.0, 6.5}) {
    for (double x : {-1.0, 0.4, 2.2, 5.0}) {
      // fourth-order central differences
      const cplx dt = (-packet_at(x, t + 2 * h, p, m) + 8.0 * packet_at(x, t + h, p, m) - 8.0 * packet_at(x, t - h, p, m) +
                       packet_at(x, t - 2 * h, p, m)) /
                      (12.0 * h);
      const cplx dxx = (-packet_at(x + 2 * h, t, p, m) + 16.0 * packet_at(x + h, t, p, m) - 30.0 * packet_at(x, t, p, m) +
                        16.0 * packet_at(x - h, t, p, m) - packet_at(x - 2 * h, t, p, m)) /
                       (12.0 * h * h);
      const cplx residual = cplx(0.0, 1.0) * dt + dxx / (2.0 * m);
      EXPECT_LE(std::abs(residual), 1e-6) << "x=" << x << " t=" << t;
    }
  }
}

TEST(FreeGaussian, CentreMovesWithGroupVelocity) {
  const WavepacketParams p{{0.0}, 2.0, {0.5}};
  const double t = 8.0, m = 2.0;
  double best = 0.0, arg = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.001) {
    const double v = std::norm(packet_at(x, t, p, m));
    if (v > best) best = v, arg = x;
  }
  EXPECT_NEAR(arg, 0.5 * t / m, 2e-3);
}

TEST(HoEigenfunction, NodesAndParity) {
  std::vector<double> xs;
  for (double x = -6.0; x <= 6.0 + 1e-12; x += 0.05) xs.push_back(x);
  const auto f0 = ho_eigenfunction_on_grid(0, 1.0, 1.0, xs, 0.05);
  const auto f1 = ho_eigenfunction_on_grid(1, 1.0, 1.0, xs, 0.05);
  for (double v : f0) EXPECT_GT(v, 0.0);
  int changes = 0;
  for (std::size_t i = 1; i < f1.size(); ++i) changes += (f1[i - 1] < 0) != (f1[i] < 0) && f1[i] != 0.0;
  EXPECT_EQ(changes, 1);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(f1[i], -f1[xs.size() - 1 - i], 1e-12);
  double dot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) dot += f0[i] * f1[i] * 0.05;
  EXPECT_LE(std::abs(dot), 1e-10);
}

TEST(HoEigenfunction, MatchesExplicitHermitePolynomials) {
  const double m = 0.8, w = 1.3, s = std::sqrt(m * w);
  for (double x : {-1.7, -0.2, 0.0, 0.9, 2.4}) {
    const double xi = s * x;
    const double g = std::sqrt(s) * std::pow(pi, -0.25) * std::exp(-0.5 * xi * xi);
    const double h2 = 4 * xi * xi - 2, h3 = 8 * xi * xi * xi - 12 * xi;
    EXPECT_NEAR(ho_eigenfunction(2, m, w, x), g * h2 / std::sqrt(8.0), 1e-13);
    EXPECT_NEAR(ho_eigenfunction(3, m, w, x), g * h3 / std::sqrt(48.0), 1e-13);
  }
}

TEST(Dispersion, ZeroAtRestAndSymmetric) {
  for (double theta : {0.3, pi / 4, 1.1}) {
    const auto model = free_model(theta);
    EXPECT_NEAR(measure_dispersion(model, 0.0), 0.0, 1e-14);
    for (double k : {0.05, 0.3, 1.2}) EXPECT_NEAR(measure_dispersion(model, k), measure_dispersion(model, -k), 1e-13);
  }
}

TEST(Dispersion, SmallWavenumberMatchesFreeParticle) {
  const auto model = free_model(pi / 4);
  const double k = 0.1;
  EXPECT_NEAR(measure_dispersion(model, k) / (k * k / 2.0), 1.0, 0.05);
}

TEST(Dispersion, QuadraticFitQuality) {
  for (double theta = pi / 8; theta <= 3 * pi / 8 + 1e-12; theta += pi / 32) {
    const auto model = free_model(theta);
    const auto ks = k_grid(0.2, 21);
    std::vector<double> w;
    for (double k : ks) w.push_back(measure_dispersion(model, k));
    const auto fit = fit_mass(ks, w);
    EXPECT_GE(fit.r_squared, 0.999);
    EXPECT_NEAR(fit.mass, std::tan(theta), 0.05 * std::tan(theta));
  }
}

TEST(Dispersion, Errors) {
  auto model = free_model(0.5);
  EXPECT_THROW(measure_dispersion(model, 4.0), InvalidArgument);
  model.potential = quadratic_potential(1.0, 1.0);
  EXPECT_THROW(measure_dispersion(model, 0.1), InvalidArgument);
  // at theta = 0 the eigenvalues exp(+-ik) are equidistant from the global phase 1
  const auto bad = free_model(0.0);
  const auto rows = dispersion_scan(bad, std::vector<double>{0.0, pi / 2});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].omega.has_value());
  EXPECT_FALSE(rows[1].omega.has_value());
  EXPECT_FALSE(rows[1].error.empty());
}

TEST(Dispersion, KGridIsExact) {
  const auto ks = k_grid(0.2, 5);
  EXPECT_EQ(ks.front(), -0.2);
  EXPECT_EQ(ks.back(), 0.2);
  EXPECT_EQ(ks[2], 0.0);
}

TEST(Arbitration, OneDimensionAgreement) {
  const cplx mu = std::polar(1.0, -pi / 3);
  const auto rep = arbitrate_mass_formulas(mu, 1.0, -1.0, 1);
  EXPECT_NEAR(rep.m_general, rep.m_closed_form, 1e-12);
  EXPECT_NEAR(rep.m_measured, rep.m_general, 0.05 * rep.m_general);
  EXPECT_EQ(rep.verdict, "both");
}

TEST(Arbitration, TwoDimensionReportsBothPredictions) {
  const cplx mu = std::polar(1.0, pi / 3);
  const auto rep = arbitrate_mass_formulas(mu, 1.0, -1.0, 2);
  EXPECT_TRUE(std::isfinite(rep.m_general));
  EXPECT_TRUE(std::isfinite(rep.m_closed_form));
  EXPECT_TRUE(std::isfinite(rep.m_measured));
  EXPECT_EQ(rep.rows.size(), 21u);
  EXPECT_NEAR(rep.m_general, 4.0 * rep.m_closed_form, 1e-12);
  EXPECT_EQ(rep.verdict, "general");
  // isotropy: the diagonal direction gives the same curvature
  EXPECT_NEAR(rep.m_measured_diagonal, rep.m_measured, 0.01 * std::abs(rep.m_measured));
}

TEST(Arbitration, DegeneratePhasesRejected) {
  EXPECT_THROW(arbitrate_mass_formulas(1.0, 1.0, -1.0, 2), InvalidArgument);
  EXPECT_THROW(arbitrate_mass_formulas(cplx(0, 1), 1.0, cplx(0, 1), 2), InvalidArgument);
  EXPECT_THROW(arbitrate_mass_formulas(cplx(0, 1), 1.0, -1.0, 4), InvalidArgument);
}
