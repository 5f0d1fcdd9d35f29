#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qlga/collision.hpp"
#include "qlga/error.hpp"
#include "qlga/evolve.hpp"
#include "qlga/state.hpp"

namespace qlga::oracle {

/// Continuum reference: mass m and V = a x^2, so omega = sqrt(2a/m).
struct ContinuumParams {
  double mass = 1.0;
  double a = 0.0;

  ContinuumParams(double mass_, double a_) : mass(mass_), a(a_) {
    if (!(mass > 0.0)) throw InvalidArgument("continuum mass must be positive");
    if (!(a >= 0.0)) throw InvalidArgument("oscillator coefficient must be non-negative");
  }
  double omega() const { return std::sqrt(2.0 * a / mass); }
};

/// Closed-form solution of i dPsi/dt = -(1/2m) Laplacian Psi for the packet
/// prod_i exp(-(x_i - c_i)^2 / (4 sigma^2) + i k_i x_i), normalized to one.
inline cplx free_gaussian(std::span<const double> x, double t, const WavepacketParams& packet, double mass) {
  if (!(packet.sigma > 0.0)) throw InvalidArgument("wavepacket width must be positive");
  if (!(mass > 0.0)) throw InvalidArgument("mass must be positive");
  if (x.size() != packet.center.size() || x.size() != packet.k.size())
    throw InvalidArgument("position dimension does not match the wavepacket");
  const double s2 = packet.sigma * packet.sigma;
  const cplx st(s2, t / (2.0 * mass));
  cplx psi = 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = packet.k[i];
    const double shift = x[i] - packet.center[i] - k * t / mass;
    const cplx expo = -shift * shift / (4.0 * st) + cplx(0.0, k * x[i] - k * k * t / (2.0 * mass));
    psi *= std::pow(2.0 * std::numbers::pi * s2, -0.25) * std::sqrt(s2 / st) * std::exp(expo);
  }
  return psi;
}

/// Harmonic-oscillator eigenfunction of level n with the continuum
/// normalization, via the stable three-term recurrence for Hermite functions.
inline double ho_eigenfunction(int n_level, double mass, double omega, double x) {
  if (n_level < 0) throw InvalidArgument("oscillator level must be non-negative");
  if (!(mass > 0.0) || !(omega > 0.0)) throw InvalidArgument("mass and omega must be positive");
  const double scale = std::sqrt(mass * omega);
  const double xi = scale * x;
  double prev = 0.0;
  double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  for (int k = 0; k < n_level; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return std::sqrt(scale) * cur;
}

/// Level-n eigenfunction sampled on a grid and normalized by quadrature
/// (sum |f|^2 dx = 1 with dx the grid spacing).
inline std::vector<double> ho_eigenfunction_on_grid(int n_level, double mass, double omega,
                                                    std::span<const double> xs, double dx) {
  std::vector<double> f(xs.size());
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    f[i] = ho_eigenfunction(n_level, mass, omega, xs[i]);
    s += f[i] * f[i] * dx;
  }
  const double inv = 1.0 / std::sqrt(s);
  for (double& v : f) v *= inv;
  return f;
}

/// One-step operator restricted to the plane wave exp(i k.x):
/// U(k)_{uv} = C_{uv} exp(-i k.e_v).
inline Matrix fourier_block(const QlgaModel& model, std::span<const double> k) {
  const int d = model.lattice.dimension();
  if (k.size() != static_cast<std::size_t>(d)) throw InvalidArgument("wavevector dimension does not match lattice");
  Matrix u = model.single_particle_matrix();
  for (int v = 0; v < 2 * d; ++v) {
    const double kv = (v % 2 == 0 ? 1.0 : -1.0) * k[static_cast<std::size_t>(v / 2)];
    u.col(v) *= std::polar(1.0, -kv);
  }
  return u;
}

/// Angular frequency (per step) of the branch whose eigenvalue lies nearest
/// the global phase: omega = -arg(lambda / global_phase).
inline double measure_dispersion(const QlgaModel& model, std::span<const double> k) {
  model.validate();
  if (model.potential || model.pair_potential) throw InvalidArgument("dispersion needs a free model (V = 0)");
  for (double kc : k)
    if (!(std::abs(kc) <= std::numbers::pi)) throw InvalidArgument("wavenumber outside [-pi, pi]");
  const Eigen::ComplexEigenSolver<Matrix> solver(fourier_block(model, k), false);
  if (solver.info() != Eigen::Success) throw NumericalError("Fourier block diagonalization failed");
  const cplx g = model.global_phase();
  const auto& ev = solver.eigenvalues();
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  Eigen::Index arg = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double dist = std::abs(ev(i) - g);
    if (dist < best) {
      second = best;
      best = dist;
      arg = i;
    } else if (dist < second) {
      second = dist;
    }
  }
  if (second - best < 1e-9 && ev.size() > 1 && std::abs(ev(arg) - g) > 1e-9)
    throw NumericalError("eigenphase branch is ambiguous at this wavenumber");
  return -std::arg(ev(arg) * std::conj(g));
}

inline double measure_dispersion(const QlgaModel& model, double k) {
  const double kk[1] = {k};
  return measure_dispersion(model, std::span<const double>(kk, 1));
}

struct MassFit {
  double mass = 0.0;
  double c2 = 0.0;
  double c4 = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit omega = c2 k^2 + c4 k^4; mass = 1 / (2 c2).
inline MassFit fit_mass(std::span<const double> ks, std::span<const double> omegas) {
  if (ks.size() != omegas.size() || ks.size() < 3) throw InvalidArgument("need at least three dispersion samples");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(ks.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(ks.size()));
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double k2 = ks[i] * ks[i];
    a(static_cast<Eigen::Index>(i), 0) = k2;
    a(static_cast<Eigen::Index>(i), 1) = k2 * k2;
    b(static_cast<Eigen::Index>(i)) = omegas[i];
  }
  const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd resid = b - a * c;
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  MassFit fit;
  fit.c2 = c(0);
  fit.c4 = c(1);
  fit.mass = 1.0 / (2.0 * c(0));
  fit.r_squared = ss_tot > 0.0 ? 1.0 - resid.squaredNorm() / ss_tot : 1.0;
  return fit;
}

/// Symmetric grid of `count` points on [-k_max, k_max].
inline std::vector<double> k_grid(double k_max, int count) {
  if (count < 2) throw InvalidArgument("k grid needs at least two points");
  std::vector<double> ks(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) ks[static_cast<std::size_t>(i)] = -k_max + 2.0 * k_max * i / (count - 1);
  return ks;
}

struct DispersionRow {
  double k = 0.0;
  std::optional<double> omega;  // empty when the branch was ambiguous
  std::string error;
};

/// Scans a 1D (or axis-aligned D-dim) dispersion; branch errors are recorded per row.
inline std::vector<DispersionRow> dispersion_scan(const QlgaModel& model, std::span<const double> ks, int axis = 0) {
  std::vector<DispersionRow> rows;
  std::vector<double> kv(static_cast<std::size_t>(model.lattice.dimension()), 0.0);
  for (double k : ks) {
    kv[static_cast<std::size_t>(axis)] = k;
    DispersionRow row{k, std::nullopt, {}};
    try {
      row.omega = measure_dispersion(model, kv);
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ArbitrationRow {
  double k = 0.0;
  double omega_measured = 0.0;
  double omega_general = 0.0;
  double omega_closed_form = 0.0;
};

struct MassArbitration {
  double m_general = 0.0;
  double m_closed_form = std::numeric_limits<double>::quiet_NaN();
  double m_measured = 0.0;
  double m_measured_diagonal = 0.0;
  double r_squared = 0.0;
  std::vector<ArbitrationRow> rows;
  /// "general", "closed_form", "both" or "neither" (5% relative agreement).
  std::string verdict;
};

/// Compares the two closed-form D-dimensional mass predictions with the
/// mass measured from the small-k curvature of the plane-wave eigenphase.
inline MassArbitration arbitrate_mass_formulas(cplx mu, cplx nu, cplx lambda, int dimension, double k_max = 0.2,
                                               int samples = 21) {
  if (dimension < 1 || dimension > 3) throw InvalidArgument("arbitration supports D in {1, 2, 3}");
  const CollisionDDParams params(mu, nu, lambda, dimension);
  if (!params.continuum_valid()) throw InvalidArgument("degenerate phases: need mu != nu and mu != lambda");
  QlgaModel model;
  model.lattice = LatticeSpec(dimension, 4);
  model.collision = params;

  MassArbitration out;
  out.m_general = mass_dd(mu, nu, dimension);
  try {
    out.m_closed_form = mass_closed_form(mu, dimension);
  } catch (const InvalidArgument&) {
  }

  const auto ks = k_grid(k_max, samples);
  std::vector<double> omegas;
  std::vector<double> kv(static_cast<std::size_t>(dimension), 0.0);
  for (double k : ks) {
    kv[0] = k;
    const double w = measure_dispersion(model, kv);
    omegas.push_back(w);
    out.rows.push_back({k, w, k * k / (2.0 * out.m_general), k * k / (2.0 * out.m_closed_form)});
  }
  const MassFit fit = fit_mass(ks, omegas);
  out.m_measured = fit.mass;
  out.r_squared = fit.r_squared;

  std::vector<double> diag;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dimension));
  for (double k : ks) {
    std::vector<double> kd(static_cast<std::size_t>(dimension), k * inv);
    diag.push_back(measure_dispersion(model, kd));
  }
  out.m_measured_diagonal = fit_mass(ks, diag).mass;

  auto close = [&](double m) { return std::isfinite(m) && std::abs(m - out.m_measured) <= 0.05 * std::abs(out.m_measured); };
  const bool a = close(out.m_general);
  const bool b = close(out.m_closed_form);
  out.verdict = a && b ? "both" : a ? "general" : b ? "closed_form" : "neither";
  return out;
}

}  // namespace qlga::oracle
