#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "desplant/errors.hpp"
#include "desplant/numeric.hpp"
#include "desplant/partition.hpp"
#include "desplant/plant.hpp"

namespace desplant {

/// Axis-aligned box the extraction samples initial states from.
class SamplingBox {
public:
  struct Interval {
    double lo;
    double hi;
  };

  explicit SamplingBox(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
    if (intervals_.empty()) {
      throw InputError("sampling box has no intervals");
    }
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      if (!(intervals_[i].lo < intervals_[i].hi)) {
        throw InputError("sampling box interval " + std::to_string(i + 1) +
                         ": lower bound must be below upper bound");
      }
    }
  }

  std::size_t dimension() const { return intervals_.size(); }
  const std::vector<Interval>& intervals() const { return intervals_; }

  template <class Rng>
  Vec draw(Rng& rng) const {
    Vec x(intervals_.size());
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      x[i] = detail::uniform_in(rng, intervals_[i].lo, intervals_[i].hi);
    }
    return x;
  }

private:
  std::vector<Interval> intervals_;
};

/// Knobs for extraction and simulation. Defaults suit well-scaled systems;
/// files and CLI flags override individual fields.
struct ExtractionConfig {
  std::size_t samples_per_cell = 64;
  double horizon = kDefaultHorizon;
  double dt = kDefaultDt;
  double eps_t = kDefaultEpsT;
  double eps_h = kDefaultEpsH;
  std::uint64_t seed = 0;

  void validate() const {
    if (samples_per_cell == 0) throw InputError("samples per cell must be positive");
    if (!(horizon > 0.0)) throw InputError("horizon must be positive");
    if (!(dt > 0.0)) throw InputError("step size must be positive");
    if (!(eps_t > 0.0)) throw InputError("time tolerance must be positive");
    if (!(eps_h > 0.0)) throw InputError("surface tolerance must be positive");
    if (dt <= eps_t) throw InputError("step size must exceed the time tolerance");
  }
};

/// Partial configuration: only fields that were explicitly given. Layering is
/// CLI flags over file settings over built-in defaults.
struct ConfigOverrides {
  std::optional<std::size_t> samples_per_cell;
  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<double> eps_t;
  std::optional<double> eps_h;
  std::optional<std::uint64_t> seed;

  ExtractionConfig apply(ExtractionConfig base) const {
    if (samples_per_cell) base.samples_per_cell = *samples_per_cell;
    if (horizon) base.horizon = *horizon;
    if (dt) base.dt = *dt;
    if (eps_t) base.eps_t = *eps_t;
    if (eps_h) base.eps_h = *eps_h;
    if (seed) base.seed = *seed;
    return base;
  }
};

/// A complete problem instance: the plant, its finite control alphabet, the
/// partition whose crossings generate symbols, and the box to sample from.
/// `pinned_cells` optionally fixes the numbering of known cells so published
/// examples keep their traditional names; `file_config` carries settings that
/// arrived with the system file.
struct PlantSystem {
  std::string name;
  VectorField field;
  ControlAlphabet alphabet;
  PartitionSpec partition;
  SamplingBox box;
  std::vector<SignVector> pinned_cells;
  ConfigOverrides file_config;

  void validate() const {
    if (field.state_dimension() != partition.dimension()) {
      throw InputError("partition dimension " + std::to_string(partition.dimension()) +
                       " does not match plant state dimension " +
                       std::to_string(field.state_dimension()));
    }
    if (field.input_dimension() != alphabet.input_dimension()) {
      throw InputError("control value dimension " +
                       std::to_string(alphabet.input_dimension()) +
                       " does not match plant input dimension " +
                       std::to_string(field.input_dimension()));
    }
    if (box.dimension() != field.state_dimension()) {
      throw InputError("sampling box dimension " + std::to_string(box.dimension()) +
                       " does not match plant state dimension " +
                       std::to_string(field.state_dimension()));
    }
    for (const SignVector& signs : pinned_cells) {
      if (signs.size() != partition.size()) {
        throw InputError("pinned cell " + signs.to_string() +
                         " does not match the partition size");
      }
      if (!signs.is_consistent()) {
        throw InputError("pinned cell " + signs.to_string() + " has a zero component");
      }
    }
  }

  // Fresh registry honouring the pinned numbering.
  CellRegistry make_registry() const {
    CellRegistry reg;
    if (!pinned_cells.empty()) reg.pin(pinned_cells);
    return reg;
  }
};

/// The two-integrator benchmark: controls r1/r2/r3 pushing the velocity down,
/// holding it, or pushing it up; surfaces x1 = 0 and x2 = 0; the quadrants
/// numbered counter-clockwise from the upper right.
inline PlantSystem double_integrator_system() {
  ControlAlphabet alphabet({{"r1", {-1.0}}, {"r2", {0.0}}, {"r3", {1.0}}});
  PartitionSpec partition({Functional(1, Vec{1.0, 0.0}, 0.0),
                           Functional(2, Vec{0.0, 1.0}, 0.0)});
  SamplingBox box({{-5.0, 5.0}, {-5.0, 5.0}});
  std::vector<SignVector> pinned = {
      SignVector({Sign{1}, Sign{1}}),
      SignVector({Sign{-1}, Sign{1}}),
      SignVector({Sign{-1}, Sign{-1}}),
      SignVector({Sign{1}, Sign{-1}}),
  };
  PlantSystem sys{"double_integrator",
                  VectorField::double_integrator(),
                  std::move(alphabet),
                  std::move(partition),
                  std::move(box),
                  std::move(pinned),
                  {}};
  sys.validate();
  return sys;
}

}  // namespace desplant
