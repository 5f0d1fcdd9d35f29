#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlga/error.hpp"
#include "qlga/state.hpp"

namespace qlga::io {

/// Shortest round-trip decimal form; identical doubles print identically.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// {"n", "lattice": {"D", "q_lat"}, "amplitudes": [[re, im], ...]} in basis order.
inline nlohmann::json state_to_json(const SectorState& state) {
  nlohmann::json amps = nlohmann::json::array();
  for (const cplx& a : state.amplitudes()) amps.push_back({a.real(), a.imag()});
  return {{"n", state.particles()},
          {"lattice", {{"D", state.lattice().dimension()}, {"q_lat", state.lattice().extent()}}},
          {"amplitudes", std::move(amps)}};
}

inline SectorState state_from_json(const nlohmann::json& j) {
  try {
    const LatticeSpec lattice(j.at("lattice").at("D").get<int>(), j.at("lattice").at("q_lat").get<int>());
    SectorState state = zero_state(lattice, j.at("n").get<int>());
    const auto& amps = j.at("amplitudes");
    if (!amps.is_array() || amps.size() != state.size())
      throw InvalidArgument("snapshot amplitude count does not match the sector basis");
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const auto& pair = amps[i];
      if (!pair.is_array() || pair.size() != 2) throw InvalidArgument("snapshot amplitudes must be [re, im] pairs");
      state[i] = cplx(pair[0].get<double>(), pair[1].get<double>());
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed state snapshot: ") + e.what());
  }
}

/// Writes to `path.tmp` and renames on commit(); an uncommitted file is
/// removed on destruction, so failed runs leave nothing behind.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path) : path_(std::move(path)), tmp_(path_) {
    tmp_ += ".tmp";
    out_.open(tmp_, std::ios::out | std::ios::trunc);
    if (!out_) throw Error("cannot open output file " + tmp_.string());
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.close();
    if (!out_) throw Error("failed writing " + tmp_.string());
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  AtomicFile f(path);
  f.stream() << j.dump(2) << '\n';
  f.commit();
}

}  // namespace qlga::io
