#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qlga/error.hpp"
#include "qlga/lattice.hpp"
#include "qlga/state.hpp"

namespace qlga {

using Matrix = Eigen::MatrixXcd;

inline constexpr double kUnitarityTol = 1e-12;
inline constexpr double kPhaseTol = 1e-12;

inline double unitarity_residual(const Matrix& m) {
  const Matrix prod = m * m.adjoint();
  return (prod - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

/// Dense square matrix certified unitary at construction.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix m, double tol = kUnitarityTol) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("unitary operator must be square");
    residual_ = m_.size() == 0 ? 0.0 : unitarity_residual(m_);
    if (!(residual_ <= tol))
      throw NumericalError("operator is not unitary: max |U U^dagger - I| = " + std::to_string(residual_));
  }

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dimension() const noexcept { return m_.rows(); }
  double residual() const noexcept { return residual_; }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
  double residual_ = 0.0;
};

inline bool is_unit(cplx z, double tol = kPhaseTol) { return std::abs(std::abs(z) - 1.0) <= tol; }

inline void require_unit(cplx z, const char* name) {
  if (!is_unit(z)) throw InvalidArgument(std::string(name) + " must be a unit-modulus phase");
}

/// 1D reflection-invariant, number-conserving rule with q = cos(theta) and
/// p = -i sin(theta); phi is the double-occupancy phase.
struct Collision1DParams {
  double theta = 0.0;
  cplx phi{1.0, 0.0};

  Collision1DParams() = default;
  Collision1DParams(double theta_, cplx phi_) : theta(theta_), phi(phi_) { validate(); }

  void validate() const {
    if (!std::isfinite(theta)) throw InvalidArgument("theta must be finite");
    require_unit(phi, "phi");
  }
  cplx q() const { return {std::cos(theta), 0.0}; }
  cplx p() const { return {0.0, -std::sin(theta)}; }
  /// Phase factored out of the total amplitude each step.
  cplx global_phase() const { return q() + p(); }
};

/// Lattice-symmetric single-particle rule in D dimensions given by its
/// eigenvalues on the constant (mu), parity-odd (nu) and remaining
/// parity-even (lambda) direction vectors.
struct CollisionDDParams {
  cplx mu{1.0, 0.0};
  cplx nu{1.0, 0.0};
  cplx lambda{1.0, 0.0};
  int dimension = 1;

  CollisionDDParams() = default;
  CollisionDDParams(cplx mu_, cplx nu_, cplx lambda_, int dimension_)
      : mu(mu_), nu(nu_), lambda(lambda_), dimension(dimension_) {
    validate();
  }

  void validate() const {
    require_unit(mu, "mu");
    require_unit(nu, "nu");
    require_unit(lambda, "lambda");
    if (dimension < 1) throw InvalidArgument("collision dimension must be >= 1");
  }
  /// mu != nu and mu != lambda; required for a Schroedinger continuum limit.
  bool continuum_valid(double tol = 1e-12) const {
    return std::abs(mu - nu) > tol && std::abs(mu - lambda) > tol;
  }
  cplx global_phase() const { return mu; }
};

using CollisionParams = std::variant<Collision1DParams, CollisionDDParams>;

inline cplx global_phase(const CollisionParams& c) {
  return std::visit([](const auto& p) { return p.global_phase(); }, c);
}

/// 4x4 rule in the local basis (--, +-, -+, ++); the first symbol is the
/// +e0 slot, the second the -e0 slot.
inline UnitaryOperator build_T1(const Collision1DParams& params) {
  params.validate();
  Matrix t = Matrix::Zero(4, 4);
  t(0, 0) = 1.0;
  t(1, 1) = params.q();
  t(1, 2) = params.p();
  t(2, 1) = params.p();
  t(2, 2) = params.q();
  t(3, 3) = params.phi;
  return UnitaryOperator(std::move(t));
}

/// Single-particle block of build_T1: rows are outgoing, columns incoming directions.
inline Matrix single_particle_block(const Collision1DParams& params) {
  Matrix c(2, 2);
  c << params.q(), params.p(), params.p(), params.q();
  return c;
}

/// mu * P_const + nu * P_odd + lambda * (P_even - P_const) over the 2D directions.
inline UnitaryOperator build_C_dd(const CollisionDDParams& params) {
  params.validate();
  const int m = 2 * params.dimension;
  Matrix p_const = Matrix::Constant(m, m, cplx(1.0 / m, 0.0));
  Matrix p_odd = Matrix::Zero(m, m);
  Matrix p_even = Matrix::Zero(m, m);
  for (int axis = 0; axis < params.dimension; ++axis) {
    const int a = 2 * axis;
    const int b = a + 1;
    p_odd(a, a) = p_odd(b, b) = 0.5;
    p_odd(a, b) = p_odd(b, a) = -0.5;
    p_even(a, a) = p_even(b, b) = p_even(a, b) = p_even(b, a) = 0.5;
  }
  Matrix c = params.mu * p_const + params.nu * p_odd + params.lambda * (p_even - p_const);
  return UnitaryOperator(std::move(c));
}

inline double mass_1d(const Collision1DParams& params) {
  params.validate();
  const cplx q = params.q();
  if (std::abs(q) < 1e-15) throw InvalidArgument("q = 0: infinite mass");
  const cplx m = cplx(0.0, 1.0) * params.p() / q;
  return m.real();
}

/// Mass from i/(2m) = (1/d)(nu/(mu - nu) + 1/2).
inline double mass_dd(cplx mu, cplx nu, int d) {
  require_unit(mu, "mu");
  require_unit(nu, "nu");
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  if (std::abs(mu - nu) < 1e-12) throw InvalidArgument("mu == nu: degenerate collision phases");
  const cplx rhs = (nu / (mu - nu) + 0.5) / static_cast<double>(d);
  if (std::abs(rhs) < 1e-15) throw InvalidArgument("mu == -nu: infinite mass");
  const cplx m = cplx(0.0, 1.0) / (2.0 * rhs);
  if (std::abs(m.imag()) > 1e-10) throw InvalidArgument("collision phases give a non-real mass");
  return m.real();
}

/// Closed form m = i (mu - 1) / (d (mu + 1)) stated for the nu = 1,
/// lambda = -1 family. Differs from mass_dd by a factor d^2.
inline double mass_closed_form(cplx mu, int d) {
  require_unit(mu, "mu");
  if (d < 1) throw InvalidArgument("dimension must be >= 1");
  if (std::abs(mu + 1.0) < 1e-12) throw InvalidArgument("mu == -1: infinite mass");
  const cplx m = cplx(0.0, 1.0) * (mu - 1.0) / (static_cast<double>(d) * (mu + 1.0));
  if (std::abs(m.imag()) > 1e-10) throw InvalidArgument("collision phase gives a non-real mass");
  return m.real();
}

/// External potential V(x) over physical coordinates; eps is the physical
/// length of one lattice unit.
struct PotentialSpec {
  std::function<double(std::span<const double>)> value;
  double eps = 1.0;

  void validate() const {
    if (!value) throw InvalidArgument("potential has no evaluation function");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("lattice scale eps must be positive");
  }
};

/// Symmetric pair potential V(x, y) over physical coordinates.
struct PairPotentialSpec {
  std::function<double(std::span<const double>, std::span<const double>)> value;
};

/// Physical coordinates of a site: eps * (x - extent/2) on every axis, so
/// symmetric potentials are centred on the lattice.
inline std::vector<double> physical_position(const LatticeSpec& lattice, double eps, SiteIndex site) {
  const Coord x = lattice.coords(site);
  const double offset = 0.5 * lattice.extent();
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = eps * (x[i] - offset);
  return r;
}

inline cplx potential_phase(const PotentialSpec& spec, std::span<const double> position) {
  const double v = spec.value(position);
  if (!std::isfinite(v)) throw InvalidArgument("potential is not finite");
  return std::polar(1.0, -spec.eps * spec.eps * v);
}

/// Per-slot operator diag(1, exp(-i eps^2 V(x))) in the basis (-, +).
inline UnitaryOperator potential_phase_op(const PotentialSpec& spec, const LatticeSpec& lattice, SiteIndex site) {
  spec.validate();
  if (site >= lattice.sites()) throw InvalidArgument("site index out of range");
  const auto x = physical_position(lattice, spec.eps, site);
  Matrix u = Matrix::Identity(2, 2);
  u(1, 1) = potential_phase(spec, x);
  return UnitaryOperator(std::move(u));
}

/// Gas rule for V = a x^2 folded into the 1D collision matrix; x is physical.
inline UnitaryOperator gas_T(cplx mu, cplx phi, double a, double eps, double x) {
  require_unit(mu, "mu");
  require_unit(phi, "phi");
  const cplx w = std::polar(1.0, -a * eps * eps * x * x);
  Matrix t = Matrix::Zero(4, 4);
  t(0, 0) = 1.0;
  t(1, 1) = t(2, 2) = 0.5 * (mu + 1.0) * w;
  t(1, 2) = t(2, 1) = 0.5 * (mu - 1.0) * w;
  t(3, 3) = phi * w * w;
  return UnitaryOperator(std::move(t));
}

inline cplx pair_interaction_phase(const PairPotentialSpec& spec, std::span<const double> x,
                                   std::span<const double> y, double eps) {
  if (!spec.value) throw InvalidArgument("pair potential has no evaluation function");
  const double v = spec.value(x, y);
  if (!std::isfinite(v)) throw InvalidArgument("pair potential is not finite");
  return std::polar(1.0, -eps * eps * v);
}

/// Checks V(x, y) == V(y, x) on every pair of sites (or a strided sample of
/// them on large lattices).
inline void check_pair_symmetry(const PairPotentialSpec& spec, const LatticeSpec& lattice, double eps,
                                double tol = 1e-12) {
  if (!spec.value) throw InvalidArgument("pair potential has no evaluation function");
  const std::size_t sites = lattice.sites();
  const std::size_t stride = sites <= 256 ? 1 : sites / 256;
  for (std::size_t i = 0; i < sites; i += stride) {
    const auto x = physical_position(lattice, eps, static_cast<SiteIndex>(i));
    for (std::size_t j = i; j < sites; j += stride) {
      const auto y = physical_position(lattice, eps, static_cast<SiteIndex>(j));
      const double a = spec.value(x, y);
      const double b = spec.value(y, x);
      if (!std::isfinite(a) || std::abs(a - b) > tol)
        throw InvalidArgument("pair potential is not symmetric or not finite");
    }
  }
}

inline PotentialSpec quadratic_potential(double a, double eps) {
  return {[a](std::span<const double> x) {
            double r2 = 0.0;
            for (double c : x) r2 += c * c;
            return a * r2;
          },
          eps};
}

inline PairPotentialSpec quadratic_distance_potential(double g) {
  return {[g](std::span<const double> x, std::span<const double> y) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
    return g * r2;
  }};
}

/// Tabulated V by Manhattan lattice separation (minimum image); values[0]
/// is the same-site contact term. Separations past the table give 0.
inline PairPotentialSpec table_pair_potential(std::vector<double> values, double eps, int extent) {
  const double period = eps * extent;
  return {[values = std::move(values), eps, period](std::span<const double> x, std::span<const double> y) {
    double sep = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = std::fmod(std::abs(x[i] - y[i]), period);
      d = std::min(d, period - d);
      sep += d;
    }
    const auto idx = static_cast<std::size_t>(std::llround(sep / eps));
    return idx < values.size() ? values[idx] : 0.0;
  }};
}

}  // namespace qlga
