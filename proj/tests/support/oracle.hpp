#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

// Closed-form reference for the two-integrator plant (position x1, velocity
// x2, constant scalar input u). Everything here is hand-derived algebra over
// the quadratic flow, deliberately sharing no code with the engine under
// test: axis crossings come from the quadratic formula, not from any
// integrator or scanner.
namespace oracle {

struct State {
  double x1;
  double x2;
};

inline State at(double x1, double x2, double u, double t) {
  return {x1 + x2 * t + 0.5 * u * t * t, x2 + u * t};
}

// One strict axis crossing: surface 1 is x1 = 0, surface 2 is x2 = 0;
// dir is +1 when the coordinate passes from negative to positive.
struct Crossing {
  int surface;
  int dir;
  double time;
};

// Simple real roots of 0.5*u*t^2 + x2*t + x1 = 0 in ascending order,
// computed with the sign-stable quadratic formula. A double root is a
// tangency, not a crossing, and is dropped.
inline std::vector<double> position_roots(double x1, double x2, double u) {
  std::vector<double> roots;
  if (u == 0.0) {
    if (x2 != 0.0) roots.push_back(-x1 / x2);
    return roots;
  }
  const double disc = x2 * x2 - 2.0 * u * x1;
  if (disc <= 0.0) return roots;
  const double s = std::sqrt(disc);
  const double q = -0.5 * (x2 + (x2 >= 0.0 ? s : -s));
  roots.push_back(q / (0.5 * u));
  roots.push_back(x1 / q);
  std::sort(roots.begin(), roots.end());
  return roots;
}

// All strict sign changes of x1 and x2 on the open interval (0, t_end),
// ascending by time.
inline std::vector<Crossing> crossings(double x1, double x2, double u, double t_end) {
  std::vector<Crossing> out;
  for (double r : position_roots(x1, x2, u)) {
    if (r > 0.0 && r < t_end) {
      const double slope = u * r + x2;  // d(x1)/dt at the root
      if (slope != 0.0) out.push_back({1, slope > 0.0 ? +1 : -1, r});
    }
  }
  if (u != 0.0) {
    const double r = -x2 / u;
    if (r > 0.0 && r < t_end) out.push_back({2, u > 0.0 ? +1 : -1, r});
  }
  std::sort(out.begin(), out.end(),
            [](const Crossing& a, const Crossing& b) { return a.time < b.time; });
  return out;
}

inline std::optional<Crossing> first_crossing(double x1, double x2, double u,
                                              double t_end) {
  const std::vector<Crossing> all = crossings(x1, x2, u, t_end);
  if (all.empty()) return std::nullopt;
  return all.front();
}

}  // namespace oracle
