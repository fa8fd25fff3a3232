#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "desplant/partition.hpp"

namespace testsupport {

// Shorthand for building sign vectors from int literals in test code.
inline desplant::SignVector sv(std::initializer_list<int> signs) {
  std::vector<desplant::Sign> s;
  s.reserve(signs.size());
  for (int v : signs) s.push_back(static_cast<desplant::Sign>(v));
  return desplant::SignVector(std::move(s));
}

// The quadrant partition of the plane: h1 = x1, h2 = x2.
inline desplant::PartitionSpec quadrant_partition() {
  std::vector<desplant::Functional> fns;
  fns.emplace_back(1, desplant::Vec{1.0, 0.0}, 0.0);
  fns.emplace_back(2, desplant::Vec{0.0, 1.0}, 0.0);
  return desplant::PartitionSpec(std::move(fns));
}

inline std::string systems_dir() { return DESPLANT_SYSTEMS_DIR; }

inline std::string bundled_double_integrator() {
  return systems_dir() + "/double_integrator.json";
}

// Scratch files go to the system temp directory so test runs never litter the
// working directory they happen to start from.
inline std::string scratch_path(const std::string& name) {
  static const std::filesystem::path dir = [] {
    const auto d = std::filesystem::temp_directory_path() / "desplant-tests";
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

}  // namespace testsupport
