#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qlga/collision.hpp"
#include "qlga/error.hpp"
#include "qlga/evolve.hpp"
#include "qlga/oracle.hpp"

namespace qlga {

inline constexpr double kEigenTol = 1e-9;
inline constexpr Eigen::Index kMaxDiagonalizeDim = 4096;

struct Eigensystem {
  Eigen::VectorXcd eigenvalues;
  Matrix eigenvectors;  // unit-norm columns
  std::vector<double> residuals;

  Eigen::Index size() const noexcept { return eigenvalues.size(); }
  double max_residual() const { return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end()); }
};

/// ||U v - lambda v|| for every pair, computed from U itself.
inline std::vector<double> eigen_residuals(const Matrix& u, const Eigen::VectorXcd& values, const Matrix& vectors) {
  std::vector<double> r(static_cast<std::size_t>(values.size()));
  const Matrix uv = u * vectors;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    r[static_cast<std::size_t>(i)] = (uv.col(i) - values(i) * vectors.col(i)).norm();
  return r;
}

/// Complete eigensystem of a unitary operator.
///
/// A unitary matrix is normal, so its complex Schur form is diagonal and the
/// Schur vectors are an orthonormal eigenbasis, degenerate clusters included.
/// Every pair is re-verified against U before returning.
inline Eigensystem eigendecompose(const UnitaryOperator& op, double tol = kEigenTol,
                                  Eigen::Index max_dim = kMaxDiagonalizeDim) {
  const Matrix& u = op.matrix();
  if (u.rows() > max_dim)
    throw CapacityError("dense diagonalization", static_cast<unsigned long long>(u.rows()),
                        static_cast<unsigned long long>(max_dim));
  Eigensystem es;
  if (u.rows() == 0) return es;
  const Eigen::ComplexSchur<Matrix> schur(u);
  if (schur.info() != Eigen::Success) throw NumericalError("Schur decomposition did not converge");
  es.eigenvalues = schur.matrixT().diagonal();
  es.eigenvectors = schur.matrixU();
  for (Eigen::Index i = 0; i < es.eigenvectors.cols(); ++i) es.eigenvectors.col(i).normalize();
  es.residuals = eigen_residuals(u, es.eigenvalues, es.eigenvectors);
  for (Eigen::Index i = 0; i < es.size(); ++i) {
    if (std::abs(std::abs(es.eigenvalues(i)) - 1.0) > tol)
      throw NumericalError("eigenvalue off the unit circle");
  }
  if (es.max_residual() > tol)
    throw NumericalError("eigen residual " + std::to_string(es.max_residual()) + " exceeds tolerance");
  return es;
}

/// E = -(arg(lambda) - arg(global_phase)) / eps^2 on the branch (-pi/eps^2, pi/eps^2].
inline double eigenphase_to_energy(cplx lambda, cplx global_phase, double eps) {
  if (!is_unit(lambda, 1e-9)) throw InvalidArgument("eigenvalue must have unit modulus");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  double phase = std::arg(lambda * std::conj(global_phase));  // (-pi, pi]
  if (phase == -std::numbers::pi) phase = std::numbers::pi;
  double e = -phase / (eps * eps);
  if (e <= -std::numbers::pi / (eps * eps)) e = std::numbers::pi / (eps * eps);
  return e;
}

struct OscillatorConfig {
  int l_sites = 16;
  double a = 0.5;           // V(x) = a x^2
  double theta = std::numbers::pi / 4;
  double eps = 0.5;         // physical length per lattice unit
  int levels = 4;           // continuum levels to match
  int parity_class = 0;
};

struct OscillatorState {
  int level = 0;            // continuum level this state was matched to
  double energy = 0.0;
  double continuum_energy = 0.0;
  double overlap = 0.0;     // |<lattice|continuum>| on the sublattice
  int nodes = 0;
  std::vector<cplx> profile;       // normalized total amplitude, phase-fixed
  std::vector<double> continuum;   // normalized continuum samples
};

struct OscillatorReport {
  OscillatorConfig config;
  double mass = 0.0;
  double omega = 0.0;
  std::vector<int> sites;                 // sublattice site indices
  std::vector<double> positions;          // physical positions of those sites
  std::vector<cplx> eigenvalues;          // all two-step eigenvalues on the sublattice
  std::vector<double> branch_energies;    // slow-branch energies, ascending
  std::vector<OscillatorState> states;    // one per matched continuum level
};

/// Sign changes of a real profile, ignoring entries below `rel` of the peak.
inline int count_nodes(const std::vector<double>& f, double rel = 0.05) {
  double peak = 0.0;
  for (double v : f) peak = std::max(peak, std::abs(v));
  int nodes = 0;
  int last = 0;
  for (double v : f) {
    if (std::abs(v) < rel * peak) continue;
    const int s = v > 0 ? 1 : -1;
    if (last != 0 && s != last) ++nodes;
    last = s;
  }
  return nodes;
}

/// Harmonic-oscillator eigenstates of the 1D single-particle rule.
///
/// Sites of opposite parity never mix over two steps, so the two-step
/// operator is diagonalized on one parity sublattice. Slow-branch states
/// (total amplitude carries most of the weight) are matched to continuum
/// levels by maximum overlap.
inline OscillatorReport oscillator_eigenstate_experiment(const OscillatorConfig& cfg) {
  if (cfg.l_sites < 4 || cfg.l_sites % 2 != 0) throw InvalidArgument("oscillator lattice needs an even site count >= 4");
  if (cfg.levels < 1) throw InvalidArgument("need at least one level to match");
  QlgaModel model;
  model.lattice = LatticeSpec(1, cfg.l_sites);
  model.collision = Collision1DParams(cfg.theta, 1.0);
  model.eps = cfg.eps;
  model.potential = quadratic_potential(cfg.a, cfg.eps);

  OscillatorReport rep;
  rep.config = cfg;
  rep.mass = mass_1d(std::get<Collision1DParams>(model.collision));
  const oracle::ContinuumParams cont(rep.mass, cfg.a);
  rep.omega = cont.omega();

  const UnitaryOperator one = step_matrix(model, 1);
  const Matrix two = one.matrix() * one.matrix();
  const auto mask = sublattice_projector(model, cfg.parity_class);
  std::vector<Eigen::Index> slots;
  for (SiteIndex s = 0; s < model.lattice.sites(); ++s) {
    if (!mask[s]) continue;
    rep.sites.push_back(static_cast<int>(s));
    rep.positions.push_back(physical_position(model.lattice, cfg.eps, s)[0]);
    for (int v = 0; v < 2; ++v) slots.push_back(static_cast<Eigen::Index>(model.lattice.slot(s, v)));
  }
  const auto dim = static_cast<Eigen::Index>(slots.size());
  Matrix block(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) block(i, j) = two(slots[static_cast<std::size_t>(i)], slots[static_cast<std::size_t>(j)]);
  const Eigensystem es = eigendecompose(UnitaryOperator(std::move(block)));

  const cplx g = model.global_phase();
  const cplx g2 = g * g;
  const std::size_t nsites = rep.sites.size();
  const double dx = 2.0 * cfg.eps;

  struct Candidate {
    double energy;
    std::vector<cplx> profile;
  };
  std::vector<Candidate> slow;
  for (Eigen::Index c = 0; c < es.size(); ++c) {
    rep.eigenvalues.push_back(es.eigenvalues(c));
    std::vector<cplx> prof(nsites);
    double tot = 0.0;
    for (std::size_t s = 0; s < nsites; ++s) {
      prof[s] = es.eigenvectors(static_cast<Eigen::Index>(2 * s), c) + es.eigenvectors(static_cast<Eigen::Index>(2 * s + 1), c);
      tot += std::norm(prof[s]);
    }
    if (tot / 2.0 <= 0.5) continue;  // fast branch: total amplitude nearly cancels
    const double nrm = std::sqrt(tot);
    std::size_t peak = 0;
    for (std::size_t s = 0; s < nsites; ++s)
      if (std::abs(prof[s]) > std::abs(prof[peak])) peak = s;
    const cplx fix = std::conj(prof[peak]) / std::abs(prof[peak]);
    for (auto& p : prof) p *= fix / nrm;
    // two steps per eigenvalue of the block
    slow.push_back({0.5 * eigenphase_to_energy(es.eigenvalues(c), g2, cfg.eps), std::move(prof)});
  }
  std::sort(slow.begin(), slow.end(), [](const Candidate& x, const Candidate& y) { return x.energy < y.energy; });
  for (const auto& c : slow) rep.branch_energies.push_back(c.energy);

  std::vector<bool> taken(slow.size(), false);
  for (int level = 0; level < cfg.levels; ++level) {
    auto f = oracle::ho_eigenfunction_on_grid(level, rep.mass, rep.omega, rep.positions, dx);
    double fn = 0.0;
    for (double v : f) fn += v * v;
    for (double& v : f) v /= std::sqrt(fn);
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < slow.size(); ++c) {
      if (taken[c]) continue;
      cplx ov = 0.0;
      for (std::size_t s = 0; s < nsites; ++s) ov += slow[c].profile[s] * f[s];
      if (std::abs(ov) > best) {
        best = std::abs(ov);
        arg = c;
      }
    }
    if (best < 0.0) break;
    taken[arg] = true;
    OscillatorState st;
    st.level = level;
    st.energy = slow[arg].energy;
    st.continuum_energy = rep.omega * (level + 0.5);
    st.overlap = best;
    st.profile = slow[arg].profile;
    // align the sign with the continuum function before counting nodes
    cplx ov = 0.0;
    for (std::size_t s = 0; s < nsites; ++s) ov += st.profile[s] * f[s];
    const cplx align = std::abs(ov) > 0 ? std::conj(ov) / std::abs(ov) : cplx{1.0, 0.0};
    std::vector<double> re(nsites);
    for (std::size_t s = 0; s < nsites; ++s) {
      st.profile[s] *= align;
      re[s] = st.profile[s].real();
    }
    st.nodes = count_nodes(re);
    st.continuum = std::move(f);
    rep.states.push_back(std::move(st));
  }
  return rep;
}

}  // namespace qlga
