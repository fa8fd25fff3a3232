#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "desplant/errors.hpp"

namespace desplant {

using Vec = std::vector<double>;

inline constexpr double kDefaultEpsH = 1e-9;
inline constexpr double kDefaultEpsT = 1e-9;
inline constexpr double kDefaultDt = 1e-3;
inline constexpr double kDefaultHorizon = 100.0;

namespace detail {

inline double dot(const Vec& a, const Vec& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline bool all_finite(const Vec& v) {
  for (double c : v) {
    if (!std::isfinite(c)) return false;
  }
  return true;
}

inline void require_dimension(const Vec& x, std::size_t n, const char* what) {
  if (x.size() != n) {
    std::ostringstream msg;
    msg << what << ": expected dimension " << n << ", got " << x.size();
    throw InputError(msg.str());
  }
}

// Engine-portable uniform draw in [0, 1) using the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace detail

// Classical fixed-step fourth-order integrator with reusable scratch space.
// `deriv` fills `dxdt` from `x`; the step is advanced in place.
class RungeKutta4 {
public:
  explicit RungeKutta4(std::size_t n) : tmp_(n), k1_(n), k2_(n), k3_(n), k4_(n) {}

  template <class Deriv>
  void step(Deriv&& deriv, Vec& x, double dt) {
    const std::size_t n = x.size();
    const double half = dt / 2.0;
    deriv(x, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
    deriv(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
    deriv(tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
    deriv(tmp_, k4_);
    const double sixth = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

private:
  Vec tmp_, k1_, k2_, k3_, k4_;
};

}  // namespace desplant
