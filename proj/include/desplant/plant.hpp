#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "desplant/errors.hpp"
#include "desplant/numeric.hpp"

namespace desplant {

/// Finite set of constant control values the interface can latch onto the
/// plant. Symbols ("r1", "r2", ...) and values must both be distinct so the
/// symbol <-> value correspondence is a bijection.
class ControlAlphabet {
public:
  struct Entry {
    std::string symbol;
    Vec value;
  };

  explicit ControlAlphabet(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) {
      throw InputError("control alphabet is empty");
    }
    input_dimension_ = entries_.front().value.size();
    if (input_dimension_ == 0) {
      throw InputError("control values must have at least one component");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const Entry& e = entries_[i];
      if (e.value.size() != input_dimension_) {
        throw InputError("control " + e.symbol +
                         ": value dimension differs from the rest of the alphabet");
      }
      if (!by_symbol_.emplace(e.symbol, i).second) {
        throw InputError("duplicate control symbol " + e.symbol);
      }
      if (!by_value_.emplace(e.value, i).second) {
        throw InputError("duplicate control value under symbols " +
                         entries_[by_value_.at(e.value)].symbol + " and " + e.symbol);
      }
    }
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t input_dimension() const { return input_dimension_; }
  const std::vector<Entry>& entries() const { return entries_; }

  bool contains(const std::string& symbol) const { return by_symbol_.count(symbol) > 0; }

  // Symbol -> constant plant input.
  const Vec& actuate(const std::string& symbol) const {
    auto it = by_symbol_.find(symbol);
    if (it == by_symbol_.end()) {
      throw InputError("unknown control symbol " + symbol);
    }
    return entries_[it->second].value;
  }

  // Inverse lookup; exact value match.
  const std::string& symbol_for(const Vec& value) const {
    auto it = by_value_.find(value);
    if (it == by_value_.end()) {
      throw InputError("no control symbol for the given value");
    }
    return entries_[it->second].symbol;
  }

  std::vector<std::string> symbols() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.symbol);
    return out;
  }

private:
  std::vector<Entry> entries_;
  std::size_t input_dimension_ = 0;
  std::map<std::string, std::size_t> by_symbol_;
  std::map<Vec, std::size_t> by_value_;
};

using Matrix = std::vector<Vec>;

/// Right-hand side dx/dt = f(x, u) of the plant. Either a linear system
/// A x + B u built from matrices, or a named builtin evaluated by a callable.
/// Builtins keep a stable name so systems referencing them serialize cleanly.
class VectorField {
public:
  using Fn = std::function<void(const Vec& x, const Vec& u, Vec& out)>;

  static VectorField linear(Matrix A, Matrix B) {
    const std::size_t n = A.size();
    if (n == 0) throw InputError("linear plant: matrix A is empty");
    for (const Vec& row : A) {
      if (row.size() != n) throw InputError("linear plant: matrix A is not square");
    }
    if (B.size() != n) {
      throw InputError("linear plant: matrix B must have one row per state component");
    }
    const std::size_t m = B.front().size();
    if (m == 0) throw InputError("linear plant: matrix B has no columns");
    for (const Vec& row : B) {
      if (row.size() != m) throw InputError("linear plant: matrix B rows differ in length");
    }
    VectorField f;
    f.state_dimension_ = n;
    f.input_dimension_ = m;
    f.A_ = std::move(A);
    f.B_ = std::move(B);
    return f;
  }

  static VectorField builtin(std::string name, std::size_t state_dimension,
                             std::size_t input_dimension, Fn fn) {
    if (!fn) throw InputError("builtin plant " + name + ": missing callable");
    VectorField f;
    f.state_dimension_ = state_dimension;
    f.input_dimension_ = input_dimension;
    f.name_ = std::move(name);
    f.fn_ = std::move(fn);
    return f;
  }

  // Two chained integrators: position driven by velocity, velocity by the
  // scalar input.
  static VectorField double_integrator() {
    return builtin("double_integrator", 2, 1, [](const Vec& x, const Vec& u, Vec& out) {
      out[0] = x[1];
      out[1] = u[0];
    });
  }

  std::size_t state_dimension() const { return state_dimension_; }
  std::size_t input_dimension() const { return input_dimension_; }

  bool is_linear() const { return !A_.empty(); }
  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const std::string& name() const { return name_; }

  // Allocation-free evaluation; `out` is resized to the state dimension.
  void derivative_into(const Vec& x, const Vec& u, Vec& out) const {
    detail::require_dimension(x, state_dimension_, "plant state");
    detail::require_dimension(u, input_dimension_, "plant input");
    out.resize(state_dimension_);
    if (fn_) {
      fn_(x, u, out);
      return;
    }
    for (std::size_t i = 0; i < state_dimension_; ++i) {
      double v = detail::dot(A_[i], x);
      for (std::size_t j = 0; j < input_dimension_; ++j) v += B_[i][j] * u[j];
      out[i] = v;
    }
  }

  Vec derivative(const Vec& x, const Vec& u) const {
    Vec out;
    derivative_into(x, u, out);
    return out;
  }

private:
  VectorField() = default;

  std::size_t state_dimension_ = 0;
  std::size_t input_dimension_ = 0;
  Matrix A_;  // nonempty iff linear
  Matrix B_;
  std::string name_;  // nonempty iff builtin
  Fn fn_;
};

/// Piecewise-constant control plan: symbol s_k applies on [t_k, t_{k+1}),
/// the last symbol from its switch time onward. Switch times are strictly
/// increasing.
class ControlSchedule {
public:
  struct Entry {
    double time;
    std::string symbol;
  };

  explicit ControlSchedule(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) {
      throw InputError("control schedule is empty");
    }
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      if (!(entries_[i].time > entries_[i - 1].time)) {
        throw InputError("control schedule times must be strictly increasing");
      }
    }
  }

  const std::vector<Entry>& entries() const { return entries_; }
  double start_time() const { return entries_.front().time; }

  // Symbol in force at time t; t must not precede the first switch.
  const std::string& symbol_at(double t) const {
    if (t < entries_.front().time) {
      throw InputError("schedule queried before its first switch time");
    }
    std::size_t k = 0;
    while (k + 1 < entries_.size() && entries_[k + 1].time <= t) ++k;
    return entries_[k].symbol;
  }

private:
  std::vector<Entry> entries_;
};

/// A numerically integrated stretch of trajectory under one constant control.
/// Samples are dense (one per integrator step, endpoints included) so event
/// scans can bracket crossings; the field rides along so a scan can re-step
/// inside a bracket at finer resolution.
struct TrajectorySegment {
  struct Sample {
    double t;
    Vec x;
  };

  const VectorField* field = nullptr;
  Vec control;
  std::vector<Sample> samples;

  double start_time() const { return samples.front().t; }
  double end_time() const { return samples.back().t; }
  const Vec& start_state() const { return samples.front().x; }
  const Vec& end_state() const { return samples.back().x; }
};

/// One classical fourth-order step of size dt under constant control,
/// in place. Non-finite results abort the run.
inline void integrate_step(const VectorField& field, const Vec& u, Vec& x, double dt,
                           RungeKutta4& stepper) {
  stepper.step([&field, &u](const Vec& s, Vec& dxdt) { field.derivative_into(s, u, dxdt); },
               x, dt);
  if (!detail::all_finite(x)) {
    throw DivergenceError("state became non-finite during integration");
  }
}

inline void integrate_step(const VectorField& field, const Vec& u, Vec& x, double dt) {
  RungeKutta4 stepper(x.size());
  integrate_step(field, u, x, dt, stepper);
}

/// Integrates x' = f(x, u) with fixed steps from t0 over the given horizon,
/// recording every step. Sample times are t0 + j*dt; the count is chosen so
/// the recorded span covers the horizon without overshooting it by a step.
inline TrajectorySegment flow(const VectorField& field, const Vec& u, const Vec& x0,
                              double t0, double horizon, double dt) {
  detail::require_dimension(x0, field.state_dimension(), "initial state");
  detail::require_dimension(u, field.input_dimension(), "control value");
  if (!(dt > 0.0)) throw InputError("step size must be positive");
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (!detail::all_finite(x0)) throw InputError("initial state is not finite");

  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
  TrajectorySegment seg;
  seg.field = &field;
  seg.control = u;
  seg.samples.reserve(steps + 1);
  seg.samples.push_back({t0, x0});

  RungeKutta4 stepper(x0.size());
  Vec x = x0;
  for (std::size_t j = 1; j <= steps; ++j) {
    integrate_step(field, u, x, dt, stepper);
    seg.samples.push_back({t0 + static_cast<double>(j) * dt, x});
  }
  return seg;
}

/// Integrates under a piecewise-constant schedule, one segment per schedule
/// entry, each starting from the previous segment's endpoint. The final
/// entry runs until t0 + horizon.
inline std::vector<TrajectorySegment> scheduled_flow(const VectorField& field,
                                                     const ControlAlphabet& alphabet,
                                                     const ControlSchedule& schedule,
                                                     const Vec& x0, double horizon,
                                                     double dt) {
  const double t0 = schedule.start_time();
  const double t_end = t0 + horizon;
  const auto& entries = schedule.entries();
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (entries.back().time >= t_end) {
    throw InputError("control schedule extends past the integration horizon");
  }

  std::vector<TrajectorySegment> segments;
  segments.reserve(entries.size());
  Vec x = x0;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double seg_start = entries[k].time;
    const double seg_end = (k + 1 < entries.size()) ? entries[k + 1].time : t_end;
    const Vec& u = alphabet.actuate(entries[k].symbol);
    TrajectorySegment seg = flow(field, u, x, seg_start, seg_end - seg_start, dt);
    x = seg.end_state();
    segments.push_back(std::move(seg));
  }
  return segments;
}

/// Exact state of the two-integrator benchmark after time t under constant
/// scalar input u: position picks up x2*t + u*t^2/2, velocity picks up u*t.
inline Vec closed_form_double_integrator(const Vec& x0, double u, double t) {
  return Vec{x0[0] + t * x0[1] + 0.5 * t * t * u, x0[1] + t * u};
}

}  // namespace desplant
