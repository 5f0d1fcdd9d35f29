#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qlga/error.hpp"

namespace qlga {

using SlotIndex = std::uint32_t;
using SiteIndex = std::uint32_t;
using Coord = std::vector<int>;

/// Periodic Cartesian lattice with `dimension` axes of `extent` sites each and
/// 2*dimension velocity slots per site.
///
/// Sites are linearized with axis 0 fastest: site = x0 + q*x1 + q^2*x2 + ...
/// Slots are site-major, direction-minor: slot = site * m + direction.
/// Direction 2i is +e_i and 2i+1 is -e_i.
class LatticeSpec {
 public:
  LatticeSpec(int dimension, int extent) : dimension_(dimension), extent_(extent) {
    if (dimension < 1) throw InvalidArgument("lattice dimension must be >= 1");
    if (extent < 2) throw InvalidArgument("lattice extent must be >= 2");
    std::uint64_t sites = 1;
    for (int i = 0; i < dimension; ++i) {
      sites *= static_cast<std::uint64_t>(extent);
      if (sites * 2u * static_cast<std::uint64_t>(dimension) > 0xffffffffull)
        throw CapacityError("lattice slot count", sites * 2u * dimension, 0xffffffffull);
    }
    sites_ = static_cast<std::size_t>(sites);
  }

  int dimension() const noexcept { return dimension_; }
  int extent() const noexcept { return extent_; }
  std::size_t sites() const noexcept { return sites_; }
  int directions_per_site() const noexcept { return 2 * dimension_; }
  std::size_t slots() const noexcept { return sites_ * static_cast<std::size_t>(2 * dimension_); }

  SlotIndex slot(SiteIndex site, int direction) const {
    return static_cast<SlotIndex>(site * static_cast<std::size_t>(directions_per_site()) +
                                  static_cast<std::size_t>(direction));
  }
  SiteIndex site_of(SlotIndex slot) const noexcept {
    return static_cast<SiteIndex>(slot / static_cast<SlotIndex>(directions_per_site()));
  }
  int direction_of(SlotIndex slot) const noexcept {
    return static_cast<int>(slot % static_cast<SlotIndex>(directions_per_site()));
  }

  Coord coords(SiteIndex site) const {
    Coord x(static_cast<std::size_t>(dimension_));
    for (int i = 0; i < dimension_; ++i) {
      x[static_cast<std::size_t>(i)] = static_cast<int>(site % static_cast<SiteIndex>(extent_));
      site /= static_cast<SiteIndex>(extent_);
    }
    return x;
  }

  /// Coordinates are reduced modulo the extent, so any integer tuple is accepted.
  SiteIndex site_index(const Coord& x) const {
    if (x.size() != static_cast<std::size_t>(dimension_))
      throw InvalidArgument("coordinate has wrong dimension");
    SiteIndex site = 0;
    for (int i = dimension_ - 1; i >= 0; --i) {
      site = site * static_cast<SiteIndex>(extent_) +
             static_cast<SiteIndex>(wrap(x[static_cast<std::size_t>(i)]));
    }
    return site;
  }

  int wrap(int c) const noexcept {
    const int r = c % extent_;
    return r < 0 ? r + extent_ : r;
  }

  void check_slot(SlotIndex slot) const {
    if (static_cast<std::size_t>(slot) >= slots())
      throw InvalidArgument("slot index " + std::to_string(slot) + " out of range");
  }

  friend bool operator==(const LatticeSpec& a, const LatticeSpec& b) noexcept {
    return a.dimension_ == b.dimension_ && a.extent_ == b.extent_;
  }

 private:
  int dimension_;
  int extent_;
  std::size_t sites_ = 0;
};

inline int opposite(int direction) { return direction ^ 1; }

/// Signed unit lattice vectors in slot order: +e0, -e0, +e1, -e1, ...
inline std::vector<Coord> directions(const LatticeSpec& spec) {
  const int d = spec.dimension();
  std::vector<Coord> out;
  out.reserve(static_cast<std::size_t>(2 * d));
  for (int i = 0; i < d; ++i) {
    for (int sign : {+1, -1}) {
      Coord v(static_cast<std::size_t>(d), 0);
      v[static_cast<std::size_t>(i)] = sign;
      out.push_back(std::move(v));
    }
  }
  return out;
}

/// Site reached from `site` by moving `steps` times along `direction`.
inline SiteIndex shift_site(const LatticeSpec& spec, SiteIndex site, int direction, int steps = 1) {
  const int axis = direction / 2;
  const int sign = (direction % 2 == 0) ? 1 : -1;
  Coord x = spec.coords(site);
  x[static_cast<std::size_t>(axis)] += sign * steps;
  return spec.site_index(x);
}

/// Advection image of every slot: (x, v) -> (x + v mod extent, v).
inline std::vector<SlotIndex> advect_permutation(const LatticeSpec& spec) {
  std::vector<SlotIndex> perm(spec.slots());
  const int m = spec.directions_per_site();
  for (SiteIndex site = 0; site < spec.sites(); ++site) {
    for (int v = 0; v < m; ++v) {
      perm[spec.slot(site, v)] = spec.slot(shift_site(spec, site, v), v);
    }
  }
  return perm;
}

inline std::vector<SlotIndex> inverse_permutation(const std::vector<SlotIndex>& perm) {
  std::vector<SlotIndex> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<SlotIndex>(i);
  return inv;
}

}  // namespace qlga
