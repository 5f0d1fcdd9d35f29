#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qlga/error.hpp"
#include "qlga/lattice.hpp"

namespace qlga {

using cplx = std::complex<double>;

inline constexpr std::uint64_t kDefaultBasisCap = 2'000'000;

/// Binomial coefficient, saturating at uint64 max instead of overflowing.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(acc);
}

/// Deterministic pairwise (tree) summation. The split points depend only on
/// the length, so the result is reproducible for a given input.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// All n-subsets of [0, slots) in lexicographic order, with O(n) ranking.
class SectorBasis {
 public:
  SectorBasis(std::size_t slots, int n, std::uint64_t cap = kDefaultBasisCap)
      : slots_(slots), n_(n) {
    if (n < 0 || static_cast<std::size_t>(n) > slots)
      throw InvalidArgument("particle count " + std::to_string(n) + " outside [0, " +
                            std::to_string(slots) + "]");
    const std::uint64_t count = binomial(slots, static_cast<std::uint64_t>(n));
    if (count > cap) throw CapacityError("sector basis", count, cap);
    size_ = static_cast<std::size_t>(count);

    const std::size_t cols = static_cast<std::size_t>(n) + 1;
    table_.assign((slots + 1) * cols, 0);
    for (std::size_t j = 0; j <= slots; ++j)
      for (std::size_t k = 0; k < cols; ++k) table_[j * cols + k] = binomial(j, k);

    configs_.resize(size_ * static_cast<std::size_t>(n));
    std::vector<SlotIndex> c(static_cast<std::size_t>(n));
    std::iota(c.begin(), c.end(), SlotIndex{0});
    for (std::size_t idx = 0; idx < size_; ++idx) {
      std::copy(c.begin(), c.end(), configs_.begin() + static_cast<std::ptrdiff_t>(idx * n));
      // next combination in lexicographic order
      int i = n - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == slots - static_cast<std::size_t>(n - i)) --i;
      if (i < 0) break;
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < n; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
  }

  std::size_t size() const noexcept { return size_; }
  int particles() const noexcept { return n_; }
  std::size_t slots() const noexcept { return slots_; }

  std::span<const SlotIndex> config(std::size_t index) const {
    return {configs_.data() + index * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
  }

  /// Lexicographic rank of a strictly increasing slot tuple.
  std::size_t rank(std::span<const SlotIndex> config) const {
    std::uint64_t acc = 0;
    for (int i = 0; i < n_; ++i) {
      acc += choose(slots_ - 1 - config[static_cast<std::size_t>(i)], static_cast<std::size_t>(n_ - i));
    }
    return static_cast<std::size_t>(static_cast<std::uint64_t>(size_) - 1 - acc);
  }

  /// Rank with validation; used on external input.
  std::size_t checked_rank(std::span<const SlotIndex> config) const {
    if (config.size() != static_cast<std::size_t>(n_))
      throw InvalidArgument("configuration has wrong particle count");
    for (std::size_t i = 0; i < config.size(); ++i) {
      if (config[i] >= slots_) throw InvalidArgument("configuration slot out of range");
      if (i > 0 && config[i] <= config[i - 1])
        throw InvalidArgument("configuration must be strictly increasing");
    }
    return rank(config);
  }

 private:
  std::uint64_t choose(std::size_t j, std::size_t k) const {
    return table_[j * (static_cast<std::size_t>(n_) + 1) + k];
  }

  std::size_t slots_;
  int n_;
  std::size_t size_ = 0;
  std::vector<std::uint64_t> table_;
  std::vector<SlotIndex> configs_;
};

/// n-particle wavefunction over the occupation basis of a lattice.
class SectorState {
 public:
  SectorState(LatticeSpec lattice, std::shared_ptr<const SectorBasis> basis, std::vector<cplx> amplitudes)
      : lattice_(lattice), basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
    if (!basis_) throw InvalidArgument("null sector basis");
    if (basis_->slots() != lattice_.slots())
      throw InvalidArgument("basis slot count does not match lattice");
    if (amplitudes_.size() != basis_->size())
      throw InvalidArgument("amplitude vector does not match basis size");
  }

  const LatticeSpec& lattice() const noexcept { return lattice_; }
  const SectorBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const SectorBasis>& basis_ptr() const noexcept { return basis_; }
  int particles() const noexcept { return basis_->particles(); }
  std::size_t size() const noexcept { return amplitudes_.size(); }

  std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }
  std::span<cplx> amplitudes() noexcept { return amplitudes_; }
  const cplx& operator[](std::size_t i) const { return amplitudes_[i]; }
  cplx& operator[](std::size_t i) { return amplitudes_[i]; }

  double norm_squared() const {
    std::vector<double> p(amplitudes_.size());
    std::transform(amplitudes_.begin(), amplitudes_.end(), p.begin(), [](const cplx& a) { return std::norm(a); });
    return pairwise_sum(p);
  }
  double norm() const { return std::sqrt(norm_squared()); }

  void normalize() {
    const double nrm = norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("cannot normalize a zero or non-finite state");
    for (auto& a : amplitudes_) a /= nrm;
  }

  /// Expected particle number per site (sums to n).
  std::vector<double> site_density() const {
    std::vector<double> rho(lattice_.sites(), 0.0);
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
      const double p = std::norm(amplitudes_[i]);
      for (SlotIndex s : basis_->config(i)) rho[lattice_.site_of(s)] += p;
    }
    return rho;
  }

 private:
  LatticeSpec lattice_;
  std::shared_ptr<const SectorBasis> basis_;
  std::vector<cplx> amplitudes_;
};

inline std::shared_ptr<const SectorBasis> make_basis(const LatticeSpec& lattice, int n,
                                                     std::uint64_t cap = kDefaultBasisCap) {
  return std::make_shared<const SectorBasis>(lattice.slots(), n, cap);
}

/// Ordered configuration list of the n-particle sector, one tuple per entry.
inline std::vector<std::vector<SlotIndex>> sector_basis(const LatticeSpec& lattice, int n,
                                                        std::uint64_t cap = kDefaultBasisCap) {
  const SectorBasis basis(lattice.slots(), n, cap);
  std::vector<std::vector<SlotIndex>> out;
  out.reserve(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    auto c = basis.config(i);
    out.emplace_back(c.begin(), c.end());
  }
  return out;
}

inline SectorState zero_state(const LatticeSpec& lattice, int n, std::uint64_t cap = kDefaultBasisCap) {
  auto basis = make_basis(lattice, n, cap);
  std::vector<cplx> amps(basis->size());
  return SectorState(lattice, std::move(basis), std::move(amps));
}

/// Basis state with every listed slot occupied (n = slots.size()).
inline SectorState configuration_state(const LatticeSpec& lattice, std::vector<SlotIndex> slots) {
  std::sort(slots.begin(), slots.end());
  for (SlotIndex s : slots) lattice.check_slot(s);
  if (std::adjacent_find(slots.begin(), slots.end()) != slots.end())
    throw InvalidArgument("a slot can hold at most one particle");
  SectorState state = zero_state(lattice, static_cast<int>(slots.size()));
  state[state.basis().checked_rank(slots)] = 1.0;
  return state;
}

inline SectorState point_state(const LatticeSpec& lattice, SlotIndex slot) {
  return configuration_state(lattice, {slot});
}

struct WavepacketParams {
  std::vector<double> center;
  double sigma = 1.0;
  std::vector<double> k;

  void validate(int dimension) const {
    if (center.size() != static_cast<std::size_t>(dimension) || k.size() != static_cast<std::size_t>(dimension))
      throw InvalidArgument("wavepacket center/k must have one entry per lattice axis");
    if (!(sigma > 0.0)) throw InvalidArgument("wavepacket width must be positive");
    for (double kc : k)
      if (!(std::abs(kc) <= std::numbers::pi)) throw InvalidArgument("wavepacket wavenumber outside [-pi, pi]");
  }
};

/// Unnormalized single-particle packet value at a lattice site (no direction weight).
inline cplx wavepacket_value(const LatticeSpec& lattice, const WavepacketParams& packet, SiteIndex site) {
  const Coord x = lattice.coords(site);
  double r2 = 0.0;
  double phase = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - packet.center[i];
    r2 += dx * dx;
    phase += packet.k[i] * x[i];
  }
  return std::exp(-r2 / (4.0 * packet.sigma * packet.sigma)) * std::polar(1.0, phase);
}

inline SectorState gaussian_state(const LatticeSpec& lattice, const WavepacketParams& packet,
                                  std::span<const cplx> direction_weights) {
  packet.validate(lattice.dimension());
  if (packet.sigma < 1.0) throw InvalidArgument("wavepacket width below one lattice unit is unresolved");
  const int m = lattice.directions_per_site();
  if (direction_weights.size() != static_cast<std::size_t>(m))
    throw InvalidArgument("need one direction weight per velocity slot");
  SectorState state = zero_state(lattice, 1);
  for (SiteIndex site = 0; site < lattice.sites(); ++site) {
    const cplx g = wavepacket_value(lattice, packet, site);
    for (int v = 0; v < m; ++v) state[lattice.slot(site, v)] = direction_weights[static_cast<std::size_t>(v)] * g;
  }
  state.normalize();
  return state;
}

/// Equal direction weights: the packet sits on the slowly varying branch.
inline SectorState gaussian_state(const LatticeSpec& lattice, const WavepacketParams& packet) {
  const std::vector<cplx> w(static_cast<std::size_t>(lattice.directions_per_site()), cplx{1.0, 0.0});
  return gaussian_state(lattice, packet, w);
}

/// Symmetrized product of single-particle packets over the n-particle sector.
/// Configurations are hard-core, so coincident slots simply have no amplitude.
inline SectorState product_gaussian_state(const LatticeSpec& lattice, const std::vector<WavepacketParams>& packets,
                                          std::uint64_t cap = kDefaultBasisCap) {
  if (packets.empty()) throw InvalidArgument("need at least one wavepacket");
  for (const auto& p : packets) {
    p.validate(lattice.dimension());
    if (p.sigma < 1.0) throw InvalidArgument("wavepacket width below one lattice unit is unresolved");
  }
  const int n = static_cast<int>(packets.size());
  SectorState state = zero_state(lattice, n, cap);
  std::vector<std::vector<cplx>> single(packets.size(), std::vector<cplx>(lattice.sites()));
  for (std::size_t a = 0; a < packets.size(); ++a)
    for (SiteIndex s = 0; s < lattice.sites(); ++s) single[a][s] = wavepacket_value(lattice, packets[a], s);

  std::vector<int> perm(packets.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto config = state.basis().config(i);
    std::iota(perm.begin(), perm.end(), 0);
    cplx sum = 0.0;
    do {
      cplx term = 1.0;
      for (std::size_t j = 0; j < config.size(); ++j)
        term *= single[static_cast<std::size_t>(perm[j])][lattice.site_of(config[j])];
      sum += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    state[i] = sum;
  }
  state.normalize();
  return state;
}

/// Per-site total amplitude with the global phase removed:
/// global_phase^(-t) * sum_v psi_v(x). Single-particle states only.
inline std::vector<cplx> total_amplitude(const SectorState& state, long long t, cplx global_phase) {
  if (state.particles() != 1) throw InvalidArgument("total amplitude is defined for single-particle states");
  if (std::abs(std::abs(global_phase) - 1.0) > 1e-12) throw InvalidArgument("global phase must have unit modulus");
  const LatticeSpec& lat = state.lattice();
  const int m = lat.directions_per_site();
  const cplx factor = std::polar(1.0, -static_cast<double>(t) * std::arg(global_phase));
  std::vector<cplx> psi(lat.sites());
  for (SiteIndex site = 0; site < lat.sites(); ++site) {
    cplx s = 0.0;
    for (int v = 0; v < m; ++v) s += state[lat.slot(site, v)];
    psi[site] = factor * s;
  }
  return psi;
}

}  // namespace qlga
