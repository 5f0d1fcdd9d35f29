#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "qlga/error.hpp"
#include "qlga/state.hpp"

namespace qlga {

/// Operation or variable count kept in log10 form; the exact integer is
/// attached only when it is representable.
struct ResourceEstimate {
  std::string formula_id;
  double log10_ops = 0.0;
  std::optional<std::uint64_t> exact_ops;
  std::optional<double> log10_approximation;
};

namespace detail {

inline double log10_factorial(std::uint64_t n) { return std::lgamma(static_cast<double>(n) + 1.0) / std::numbers::ln10; }

/// base^exp, or nullopt on uint64 overflow.
inline std::optional<unsigned __int128> checked_pow(std::uint64_t base, std::uint64_t exp) {
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && acc > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
    acc *= base;
  }
  return acc;
}

inline std::optional<std::uint64_t> to_u64(std::optional<unsigned __int128> v) {
  if (!v || *v > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  return static_cast<std::uint64_t>(*v);
}

inline std::optional<std::uint64_t> checked_mul(std::optional<std::uint64_t> a, std::optional<std::uint64_t> b) {
  if (!a || !b) return std::nullopt;
  return to_u64(static_cast<unsigned __int128>(*a) * *b);
}

inline void require_positive(long long v, const char* name) {
  if (v < 1) throw InvalidArgument(std::string(name) + " must be a positive integer");
}

}  // namespace detail

/// C(lm, n) complex amplitudes; the (lm)^n / n! approximation rides along.
inline ResourceEstimate count_variables(std::uint64_t l, std::uint64_t m, std::uint64_t n) {
  if (l == 0 || m == 0) throw InvalidArgument("lattice size and slots per site must be positive");
  const std::uint64_t lm = l * m;
  if (n > lm) throw InvalidArgument("particle count exceeds the number of slots");
  ResourceEstimate r;
  r.formula_id = "variables";
  r.log10_ops = detail::log10_factorial(lm) - detail::log10_factorial(n) - detail::log10_factorial(lm - n);
  const std::uint64_t exact = binomial(lm, n);
  if (exact != std::numeric_limits<std::uint64_t>::max()) {
    r.exact_ops = exact;
    r.log10_ops = std::log10(static_cast<double>(exact));
  }
  r.log10_approximation = static_cast<double>(n) * std::log10(static_cast<double>(lm)) - detail::log10_factorial(n);
  return r;
}

/// q^(2 + D n) (2D)^n / n! classical operations.
inline ResourceEstimate t_classical(long long q, long long dimension, long long n) {
  detail::require_positive(q, "q");
  detail::require_positive(dimension, "D");
  if (n < 0) throw InvalidArgument("n must be non-negative");
  const auto uq = static_cast<std::uint64_t>(q);
  const auto ud = static_cast<std::uint64_t>(dimension);
  const auto un = static_cast<std::uint64_t>(n);
  ResourceEstimate r;
  r.formula_id = "T_classical";
  r.log10_ops = static_cast<double>(2 + ud * un) * std::log10(static_cast<double>(uq)) +
                static_cast<double>(un) * std::log10(static_cast<double>(2 * ud)) - detail::log10_factorial(un);
  const auto num = detail::checked_mul(detail::to_u64(detail::checked_pow(uq, 2 + ud * un)),
                                       detail::to_u64(detail::checked_pow(2 * ud, un)));
  std::optional<std::uint64_t> nfact = 1;
  for (std::uint64_t i = 2; i <= un && nfact; ++i) nfact = detail::checked_mul(nfact, i);
  if (num && nfact && *num % *nfact == 0) {
    r.exact_ops = *num / *nfact;
    r.log10_ops = std::log10(static_cast<double>(*r.exact_ops));
  }
  return r;
}

/// 2D q^(2 + D) quantum operations with contact interactions only.
inline ResourceEstimate t_quantum(long long q, long long dimension) {
  detail::require_positive(q, "q");
  detail::require_positive(dimension, "D");
  const auto uq = static_cast<std::uint64_t>(q);
  const auto ud = static_cast<std::uint64_t>(dimension);
  ResourceEstimate r;
  r.formula_id = "T_quantum";
  r.log10_ops = std::log10(2.0 * static_cast<double>(ud)) + static_cast<double>(2 + ud) * std::log10(static_cast<double>(uq));
  r.exact_ops = detail::checked_mul(2 * ud, detail::to_u64(detail::checked_pow(uq, 2 + ud)));
  if (r.exact_ops) r.log10_ops = std::log10(static_cast<double>(*r.exact_ops));
  return r;
}

/// 4 D^2 q^(2 + 2D) quantum operations with an arbitrary pair potential.
inline ResourceEstimate t_quantum_pairwise(long long q, long long dimension) {
  detail::require_positive(q, "q");
  detail::require_positive(dimension, "D");
  const auto uq = static_cast<std::uint64_t>(q);
  const auto ud = static_cast<std::uint64_t>(dimension);
  ResourceEstimate r;
  r.formula_id = "T_quantum_pairwise";
  r.log10_ops = std::log10(4.0 * static_cast<double>(ud * ud)) +
                static_cast<double>(2 + 2 * ud) * std::log10(static_cast<double>(uq));
  r.exact_ops = detail::checked_mul(4 * ud * ud, detail::to_u64(detail::checked_pow(uq, 2 + 2 * ud)));
  if (r.exact_ops) r.log10_ops = std::log10(static_cast<double>(*r.exact_ops));
  return r;
}

}  // namespace qlga
