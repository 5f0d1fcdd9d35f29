#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "qlga/collision.hpp"
#include "qlga/error.hpp"
#include "qlga/lattice.hpp"
#include "qlga/state.hpp"

namespace qlga {

inline constexpr std::uint64_t kDefaultMatrixCap = 4096;
inline constexpr double kNormDriftTol = 1e-9;

/// Everything that defines one time step.
struct QlgaModel {
  LatticeSpec lattice{1, 2};
  CollisionParams collision = Collision1DParams{};
  std::optional<PotentialSpec> potential;
  std::optional<PairPotentialSpec> pair_potential;
  double eps = 1.0;

  void validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("lattice scale eps must be positive");
    if (const auto* c1 = std::get_if<Collision1DParams>(&collision)) {
      c1->validate();
      if (lattice.dimension() != 1) throw InvalidArgument("the 1D collision rule needs a 1D lattice");
    } else {
      const auto& cd = std::get<CollisionDDParams>(collision);
      cd.validate();
      if (cd.dimension != lattice.dimension())
        throw InvalidArgument("collision rule dimension does not match the lattice");
    }
    if (potential) {
      potential->validate();
      if (std::abs(potential->eps - eps) > 1e-15 * eps)
        throw InvalidArgument("potential lattice scale differs from the model's");
    }
    if (pair_potential && !pair_potential->value) throw InvalidArgument("pair potential has no evaluation function");
  }

  /// Multi-particle sectors need the double-occupancy entry, which only the
  /// 1D rule defines.
  void check_sector(int n) const {
    if (n >= 2 && !std::holds_alternative<Collision1DParams>(collision)) {
      throw UnsupportedSector("multi-particle evolution is only defined for the 1D collision rule (D = " +
                              std::to_string(lattice.dimension()) + ", n = " + std::to_string(n) + ")");
    }
  }

  cplx global_phase() const { return qlga::global_phase(collision); }

  /// Outgoing-by-incoming single-particle collision matrix (m x m).
  Matrix single_particle_matrix() const {
    if (const auto* c1 = std::get_if<Collision1DParams>(&collision)) return single_particle_block(*c1);
    return build_C_dd(std::get<CollisionDDParams>(collision)).matrix();
  }

  cplx double_occupancy_phase() const {
    if (const auto* c1 = std::get_if<Collision1DParams>(&collision)) return c1->phi;
    return 1.0;
  }
};

struct ExecutionOptions {
  unsigned threads = 1;
};

namespace detail {

/// Runs body(begin, end) over [0, count) split into contiguous chunks.
template <class Body>
void parallel_ranges(std::size_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || count < 1024) {
    body(std::size_t{0}, count);
    return;
  }
  const std::size_t chunk = (count + threads - 1) / threads;
  std::vector<std::jthread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&body, begin, end] { body(begin, end); });
  }
}

}  // namespace detail

/// Gather-form one-step operator bound to a model and an n-particle basis.
///
/// For each output configuration the contributing inputs are enumerated by
/// undoing the collision site by site and then undoing advection, so every
/// output is accumulated in a fixed order regardless of thread count.
class Stepper {
 public:
  Stepper(const QlgaModel& model, std::shared_ptr<const SectorBasis> basis, bool cache_plan = true)
      : lattice_(model.lattice), basis_(std::move(basis)) {
    model.validate();
    if (!basis_ || basis_->slots() != lattice_.slots()) throw InvalidArgument("basis does not match the lattice");
    model.check_sector(basis_->particles());

    m_ = lattice_.directions_per_site();
    collide_ = model.single_particle_matrix();
    phi_ = model.double_occupancy_phase();
    inverse_advect_ = inverse_permutation(advect_permutation(lattice_));

    site_phase_.assign(lattice_.sites(), cplx{1.0, 0.0});
    if (model.potential) {
      for (SiteIndex s = 0; s < lattice_.sites(); ++s)
        site_phase_[s] = potential_phase(*model.potential, physical_position(lattice_, model.eps, s));
    }
    if (model.pair_potential && basis_->particles() >= 2) {
      const std::size_t l = lattice_.sites();
      if (l > 4096) throw CapacityError("pair phase table (sites)", l, 4096);
      pair_phase_.assign(l * l, cplx{1.0, 0.0});
      for (SiteIndex a = 0; a < l; ++a) {
        const auto x = physical_position(lattice_, model.eps, a);
        for (SiteIndex b = 0; b < l; ++b) {
          pair_phase_[a * l + b] =
              pair_interaction_phase(*model.pair_potential, x, physical_position(lattice_, model.eps, b), model.eps);
        }
      }
    }

    const std::size_t max_terms = std::size_t{1} << std::min(basis_->particles(), 20);
    if (cache_plan && basis_->size() * max_terms <= kPlanEntryCap) build_plan();
  }

  const SectorBasis& basis() const noexcept { return *basis_; }
  bool has_plan() const noexcept { return !plan_offsets_.empty(); }

  void apply(std::span<const cplx> in, std::span<cplx> out, unsigned threads = 1) const {
    if (in.size() != basis_->size() || out.size() != basis_->size())
      throw InvalidArgument("amplitude vector does not match the stepper basis");
    if (has_plan()) {
      detail::parallel_ranges(basis_->size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          cplx acc = 0.0;
          for (std::size_t t = plan_offsets_[i]; t < plan_offsets_[i + 1]; ++t) acc += plan_coef_[t] * in[plan_index_[t]];
          out[i] = plan_phase_[i] * acc;
        }
      });
      return;
    }
    detail::parallel_ranges(basis_->size(), threads, [&](std::size_t begin, std::size_t end) {
      Scratch scratch;
      for (std::size_t i = begin; i < end; ++i) {
        cplx acc = 0.0;
        for_each_preimage(i, scratch, [&](std::size_t j, cplx coef) { acc += coef * in[j]; });
        out[i] = diagonal_phase(i) * acc;
      }
    });
  }

 private:
  static constexpr std::size_t kPlanEntryCap = 1u << 25;

  struct Scratch {
    std::vector<SlotIndex> incoming;
    std::vector<SlotIndex> pre;
    std::vector<std::size_t> single_pos;
    std::vector<int> digit;
  };

  cplx diagonal_phase(std::size_t index) const {
    const auto c = basis_->config(index);
    cplx phase = 1.0;
    for (SlotIndex s : c) phase *= site_phase_[lattice_.site_of(s)];
    if (!pair_phase_.empty()) {
      const std::size_t l = lattice_.sites();
      for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = a + 1; b < c.size(); ++b)
          phase *= pair_phase_[lattice_.site_of(c[a]) * l + lattice_.site_of(c[b])];
    }
    return phase;
  }

  template <class Emit>
  void for_each_preimage(std::size_t index, Scratch& s, Emit&& emit) const {
    const auto out = basis_->config(index);
    const std::size_t n = out.size();
    s.incoming.assign(out.begin(), out.end());
    s.pre.resize(n);
    s.single_pos.clear();

    // Sites with a single particle mix over all m incoming directions; a
    // doubly occupied 1D site only picks up phi.
    cplx fixed = 1.0;
    for (std::size_t a = 0; a < n;) {
      const SiteIndex site = lattice_.site_of(out[a]);
      std::size_t b = a + 1;
      while (b < n && lattice_.site_of(out[b]) == site) ++b;
      if (b - a == 1) {
        s.single_pos.push_back(a);
      } else {
        for (std::size_t r = a + 1; r < b; ++r) fixed *= phi_;
      }
      a = b;
    }

    const std::size_t k = s.single_pos.size();
    s.digit.assign(k, 0);
    while (true) {
      cplx coef = fixed;
      for (std::size_t t = 0; t < k; ++t) {
        const std::size_t pos = s.single_pos[t];
        const SiteIndex site = lattice_.site_of(out[pos]);
        const int u = lattice_.direction_of(out[pos]);
        const int v = s.digit[t];
        coef *= collide_(u, v);
        s.incoming[pos] = lattice_.slot(site, v);
      }
      if (coef != cplx{0.0, 0.0}) {
        for (std::size_t a = 0; a < n; ++a) s.pre[a] = inverse_advect_[s.incoming[a]];
        std::sort(s.pre.begin(), s.pre.end());
        emit(basis_->rank(s.pre), coef);
      }
      std::size_t t = 0;
      while (t < k && ++s.digit[t] == m_) s.digit[t++] = 0;
      if (t == k) break;
    }
  }

  void build_plan() {
    const std::size_t size = basis_->size();
    plan_offsets_.reserve(size + 1);
    plan_offsets_.push_back(0);
    plan_phase_.resize(size);
    Scratch scratch;
    for (std::size_t i = 0; i < size; ++i) {
      for_each_preimage(i, scratch, [&](std::size_t j, cplx coef) {
        plan_index_.push_back(j);
        plan_coef_.push_back(coef);
      });
      plan_offsets_.push_back(plan_index_.size());
      plan_phase_[i] = diagonal_phase(i);
    }
  }

  LatticeSpec lattice_;
  std::shared_ptr<const SectorBasis> basis_;
  int m_ = 2;
  Matrix collide_;
  cplx phi_{1.0, 0.0};
  std::vector<SlotIndex> inverse_advect_;
  std::vector<cplx> site_phase_;
  std::vector<cplx> pair_phase_;

  std::vector<std::size_t> plan_offsets_;
  std::vector<std::size_t> plan_index_;
  std::vector<cplx> plan_coef_;
  std::vector<cplx> plan_phase_;
};

inline void check_compatible(const SectorState& state, const QlgaModel& model) {
  if (!(state.lattice() == model.lattice)) throw InvalidArgument("state lattice differs from the model lattice");
}

/// One step: advect, collide, external potential, pair interaction.
inline SectorState step(const SectorState& state, const QlgaModel& model, ExecutionOptions opts = {}) {
  check_compatible(state, model);
  const Stepper stepper(model, state.basis_ptr(), false);
  std::vector<cplx> out(state.size());
  stepper.apply(state.amplitudes(), out, opts.threads);
  return SectorState(state.lattice(), state.basis_ptr(), std::move(out));
}

/// Called at t = 0 and after every step with the norm and per-site density.
using StepObserver = std::function<void(long long t, double norm, const std::vector<double>& density)>;

inline SectorState evolve(const SectorState& state, const QlgaModel& model, long long steps,
                          const StepObserver& observer = {}, ExecutionOptions opts = {}) {
  if (steps < 0) throw InvalidArgument("step count must be non-negative");
  check_compatible(state, model);
  const Stepper stepper(model, state.basis_ptr());
  const double norm0 = state.norm();
  std::vector<cplx> cur(state.amplitudes().begin(), state.amplitudes().end());
  std::vector<cplx> next(cur.size());
  SectorState view(state.lattice(), state.basis_ptr(), cur);
  if (observer) observer(0, norm0, view.site_density());
  for (long long t = 1; t <= steps; ++t) {
    stepper.apply(cur, next, opts.threads);
    std::swap(cur, next);
    if (observer) {
      view = SectorState(state.lattice(), state.basis_ptr(), cur);
      observer(t, view.norm(), view.site_density());
    }
  }
  SectorState result(state.lattice(), state.basis_ptr(), std::move(cur));
  const double drift = std::abs(result.norm() - norm0);
  if (drift > kNormDriftTol)
    throw NumericalError("norm drift " + std::to_string(drift) + " exceeds tolerance over the run");
  return result;
}

/// Dense one-step matrix on the n-particle sector, M(i, j) = amplitude that
/// configuration j evolves into configuration i.
///
/// Built column by column in scatter form (forward advection, then every
/// outgoing branch of the collision), independently of Stepper's gather form.
inline UnitaryOperator step_matrix(const QlgaModel& model, int n, std::uint64_t cap = kDefaultMatrixCap) {
  model.validate();
  model.check_sector(n);
  const LatticeSpec& lat = model.lattice;
  const SectorBasis basis(lat.slots(), n, cap);
  const auto size = static_cast<Eigen::Index>(basis.size());
  const auto advect = advect_permutation(lat);
  const Matrix collide = model.single_particle_matrix();
  const cplx phi = model.double_occupancy_phase();
  const int m = lat.directions_per_site();

  auto output_phase = [&](std::span<const SlotIndex> c) {
    cplx phase = 1.0;
    std::vector<std::vector<double>> pos;
    for (SlotIndex s : c) pos.push_back(physical_position(lat, model.eps, lat.site_of(s)));
    if (model.potential)
      for (const auto& x : pos) phase *= potential_phase(*model.potential, x);
    if (model.pair_potential)
      for (std::size_t a = 0; a < pos.size(); ++a)
        for (std::size_t b = a + 1; b < pos.size(); ++b)
          phase *= pair_interaction_phase(*model.pair_potential, pos[a], pos[b], model.eps);
    return phase;
  };

  Matrix mat = Matrix::Zero(size, size);
  std::vector<SlotIndex> moved(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < size; ++j) {
    const auto c = basis.config(static_cast<std::size_t>(j));
    for (std::size_t a = 0; a < c.size(); ++a) moved[a] = advect[c[a]];
    std::sort(moved.begin(), moved.end());

    // Branches: list of (partial configuration, amplitude), expanded site by site.
    std::vector<std::pair<std::vector<SlotIndex>, cplx>> branches{{{}, cplx{1.0, 0.0}}};
    for (std::size_t a = 0; a < moved.size();) {
      const SiteIndex site = lat.site_of(moved[a]);
      std::size_t b = a;
      while (b < moved.size() && lat.site_of(moved[b]) == site) ++b;
      std::vector<std::pair<std::vector<SlotIndex>, cplx>> grown;
      for (auto& [partial, amp] : branches) {
        if (b - a == 1) {
          const int v = lat.direction_of(moved[a]);
          for (int u = 0; u < m; ++u) {
            const cplx w = collide(u, v);
            if (w == cplx{0.0, 0.0}) continue;
            auto next = partial;
            next.push_back(lat.slot(site, u));
            grown.emplace_back(std::move(next), amp * w);
          }
        } else {
          auto next = partial;
          cplx w = amp;
          for (std::size_t r = a; r < b; ++r) next.push_back(moved[r]);
          for (std::size_t r = a + 1; r < b; ++r) w *= phi;
          grown.emplace_back(std::move(next), w);
        }
      }
      branches = std::move(grown);
      a = b;
    }
    for (auto& [out, amp] : branches) {
      std::sort(out.begin(), out.end());
      const auto i = static_cast<Eigen::Index>(basis.checked_rank(out));
      mat(i, j) += amp * output_phase(out);
    }
  }
  return UnitaryOperator(std::move(mat));
}

/// Sites with x mod 2 == parity_class on an even-extent 1D lattice.
inline std::vector<bool> sublattice_projector(const QlgaModel& model, int parity_class) {
  const LatticeSpec& lat = model.lattice;
  if (lat.dimension() != 1) throw InvalidArgument("parity sublattices are only provided in 1D");
  if (lat.extent() % 2 != 0) throw InvalidArgument("parity sublattices need an even extent");
  if (parity_class != 0 && parity_class != 1) throw InvalidArgument("parity class must be 0 or 1");
  std::vector<bool> mask(lat.sites());
  for (SiteIndex s = 0; s < lat.sites(); ++s) mask[s] = static_cast<int>(s % 2) == parity_class;
  return mask;
}

}  // namespace qlga
