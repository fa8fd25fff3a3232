#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "desplant/errors.hpp"
#include "desplant/numeric.hpp"

namespace desplant {

// Sign of a functional value: -1, 0 or +1.
using Sign = std::int8_t;

// Values with |v| < eps count as lying on the hypersurface.
inline Sign sign_of(double v, double eps = kDefaultEpsH) {
  if (v >= eps) return Sign{1};
  if (v <= -eps) return Sign{-1};
  return Sign{0};
}

enum class Direction : std::int8_t { minus = -1, plus = +1 };

inline char direction_char(Direction d) { return d == Direction::plus ? '+' : '-'; }

inline Direction direction_of_sign(Sign s) {
  return s > 0 ? Direction::plus : Direction::minus;
}

/// Vector of signs of all partition functionals at a state.
/// Consistent when no component is zero, i.e. the state lies strictly
/// inside a cell rather than on a separating hypersurface.
class SignVector {
public:
  SignVector() = default;
  explicit SignVector(std::vector<Sign> components) : components_(std::move(components)) {}

  std::size_t size() const { return components_.size(); }
  Sign operator[](std::size_t i) const { return components_[i]; }
  const std::vector<Sign>& components() const { return components_; }

  bool is_consistent() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](Sign s) { return s != 0; });
  }

  // Copy with component `i` (0-based) negated. The component must be nonzero.
  SignVector flipped(std::size_t i) const {
    std::vector<Sign> s = components_;
    s[i] = static_cast<Sign>(-s[i]);
    return SignVector(std::move(s));
  }

  SignVector with(std::size_t i, Sign value) const {
    std::vector<Sign> s = components_;
    s[i] = value;
    return SignVector(std::move(s));
  }

  std::string to_string() const {
    std::string out = "[";
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(static_cast<int>(components_[i]));
    }
    out += ']';
    return out;
  }

  friend bool operator==(const SignVector&, const SignVector&) = default;
  friend auto operator<=>(const SignVector&, const SignVector&) = default;

private:
  std::vector<Sign> components_;
};

// Affine scalar map h(x) = normal . x + offset.
struct AffineMap {
  Vec normal;
  double offset = 0.0;
};

// Smooth scalar map registered in code under a stable name. The zero set is
// used as a separating hypersurface just like the affine case; such maps are
// constructed programmatically and never read from files.
struct NamedMap {
  std::string name;
  std::size_t dimension = 0;
  std::function<double(const Vec&)> fn;
};

/// One indexed partition functional. The zero set splits the state space into
/// a negative and a positive open halfspace.
class Functional {
public:
  // Affine functional; the normal vector must be nonzero so the zero set is a
  // genuine hypersurface.
  Functional(int id, Vec normal, double offset) : id_(id) {
    bool nonzero = false;
    for (double c : normal) {
      if (c != 0.0) nonzero = true;
    }
    if (normal.empty() || !nonzero) {
      throw InputError("functional " + std::to_string(id) + ": normal vector is zero");
    }
    body_ = AffineMap{std::move(normal), offset};
  }

  Functional(int id, std::string name, std::size_t dimension,
             std::function<double(const Vec&)> fn)
      : id_(id), body_(NamedMap{std::move(name), dimension, std::move(fn)}) {
    if (!std::get<NamedMap>(body_).fn) {
      throw InputError("functional " + std::to_string(id) + ": missing callable");
    }
  }

  int id() const { return id_; }

  bool is_affine() const { return std::holds_alternative<AffineMap>(body_); }
  const AffineMap* affine() const { return std::get_if<AffineMap>(&body_); }
  const NamedMap* named() const { return std::get_if<NamedMap>(&body_); }

  std::size_t dimension() const {
    if (const auto* a = std::get_if<AffineMap>(&body_)) return a->normal.size();
    return std::get<NamedMap>(body_).dimension;
  }

  double evaluate(const Vec& x) const {
    detail::require_dimension(x, dimension(), "functional argument");
    if (const auto* a = std::get_if<AffineMap>(&body_)) {
      return detail::dot(a->normal, x) + a->offset;
    }
    return std::get<NamedMap>(body_).fn(x);
  }

private:
  int id_;
  std::variant<AffineMap, NamedMap> body_;
};

/// Ordered set of N partition functionals. The list order is fixed and
/// determines the component order of every SignVector; ids must be exactly
/// 1..N in list order.
class PartitionSpec {
public:
  explicit PartitionSpec(std::vector<Functional> functionals)
      : functionals_(std::move(functionals)) {
    if (functionals_.empty()) {
      throw InputError("partition needs at least one functional");
    }
    dimension_ = functionals_.front().dimension();
    for (std::size_t i = 0; i < functionals_.size(); ++i) {
      if (functionals_[i].id() != static_cast<int>(i) + 1) {
        throw InputError("functional ids must be contiguous 1..N in order; position " +
                         std::to_string(i + 1) + " has id " +
                         std::to_string(functionals_[i].id()));
      }
      if (functionals_[i].dimension() != dimension_) {
        throw InputError("functional " + std::to_string(functionals_[i].id()) +
                         ": dimension differs from the rest of the partition");
      }
    }
  }

  std::size_t size() const { return functionals_.size(); }   // N
  std::size_t dimension() const { return dimension_; }       // n

  // 1-based surface index, matching event and symbol numbering.
  const Functional& functional(int id) const {
    if (id < 1 || id > static_cast<int>(functionals_.size())) {
      throw InputError("no functional with id " + std::to_string(id));
    }
    return functionals_[static_cast<std::size_t>(id) - 1];
  }

  const std::vector<Functional>& functionals() const { return functionals_; }

  SignVector quality(const Vec& x, double eps_h = kDefaultEpsH) const {
    std::vector<Sign> signs(functionals_.size());
    quality_into(x, eps_h, signs);
    return SignVector(std::move(signs));
  }

  // Allocation-free variant for integration loops.
  void quality_into(const Vec& x, double eps_h, std::vector<Sign>& out) const {
    detail::require_dimension(x, dimension_, "quality argument");
    out.resize(functionals_.size());
    for (std::size_t i = 0; i < functionals_.size(); ++i) {
      out[i] = sign_of(functionals_[i].evaluate(x), eps_h);
    }
  }

private:
  std::vector<Functional> functionals_;
  std::size_t dimension_;
};

/// A discrete state: the all-nonzero sign vector identifying one cell, plus
/// the display symbol ("p1", "p2", ...) assigned at registration.
/// Two labels are equal exactly when their sign sequences are equal.
struct CellLabel {
  SignVector signs;
  std::string symbol;

  friend bool operator==(const CellLabel& a, const CellLabel& b) {
    return a.signs == b.signs;
  }
};

// Result of an adjacency test: the unique separating surface (1-based) and
// the crossing direction from the first cell into the second.
struct Adjacency {
  int surface;
  Direction dir;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;
};

/// Two cells are adjacent when their sign vectors differ in exactly one
/// component; that component names the shared separating hypersurface.
/// Direction is `plus` when the second cell lies on the positive side.
inline std::optional<Adjacency> adjacency(const SignVector& a, const SignVector& b) {
  if (a.size() != b.size()) {
    throw InputError("adjacency: sign vectors come from different partitions");
  }
  int surface = 0;
  int differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) {
      ++differing;
      surface = static_cast<int>(i) + 1;
    }
  }
  if (differing != 1) return std::nullopt;
  const Sign entered = b[static_cast<std::size_t>(surface) - 1];
  return Adjacency{surface, direction_of_sign(entered)};
}

inline std::optional<Adjacency> adjacency(const CellLabel& a, const CellLabel& b) {
  return adjacency(a.signs, b.signs);
}

/// Registry of cells discovered so far. Labels are assigned in first-seen
/// order ("p1", "p2", ...) unless a pinned ordering was installed first;
/// lookup is bijective between registered sign sequences and symbols.
/// Registration locks on insert so concurrent readers stay safe.
class CellRegistry {
public:
  CellRegistry() = default;
  CellRegistry(const CellRegistry&) = delete;
  CellRegistry& operator=(const CellRegistry&) = delete;

  // Movable so factories can hand a freshly pinned registry to the caller;
  // the mutex itself is not moved, the new registry starts with its own.
  CellRegistry(CellRegistry&& other) noexcept {
    std::lock_guard<std::mutex> lock(other.mu_);
    cells_ = std::move(other.cells_);
    index_ = std::move(other.index_);
  }

  // Pre-register cells in a fixed order (used by built-in systems with a
  // canonical numbering). Only valid on an empty registry.
  void pin(const std::vector<SignVector>& order) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!cells_.empty()) {
      throw InputError("cannot pin a non-empty cell registry");
    }
    for (const SignVector& signs : order) {
      insert_locked(signs);
    }
  }

  // Returns the label for a consistent sign vector, registering it on first
  // sight.
  CellLabel label_of(const SignVector& signs) {
    if (!signs.is_consistent()) {
      throw BoundaryStateError("cannot label an inconsistent sign vector " +
                               signs.to_string());
    }
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(signs);
    if (it != index_.end()) return cells_[it->second];
    return insert_locked(signs);
  }

  std::optional<CellLabel> find(const SignVector& signs) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = index_.find(signs);
    if (it == index_.end()) return std::nullopt;
    return cells_[it->second];
  }

  std::size_t count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cells_.size();
  }

  std::vector<CellLabel> cells() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cells_;
  }

private:
  CellLabel insert_locked(const SignVector& signs) {
    if (!signs.is_consistent()) {
      throw BoundaryStateError("cannot register an inconsistent sign vector");
    }
    if (!cells_.empty() && cells_.front().signs.size() != signs.size()) {
      throw InputError("sign vector length differs from registered cells");
    }
    if (index_.count(signs)) {
      throw InputError("duplicate cell in pinned ordering");
    }
    CellLabel label{signs, "p" + std::to_string(cells_.size() + 1)};
    index_.emplace(signs, cells_.size());
    cells_.push_back(label);
    return label;
  }

  mutable std::mutex mu_;
  std::vector<CellLabel> cells_;
  std::map<SignVector, std::size_t> index_;
};

/// Maps a state strictly inside a cell to that cell's label, registering the
/// cell on first sight. States on a hypersurface have no cell and are
/// rejected.
inline CellLabel cell_of(const PartitionSpec& p, CellRegistry& reg, const Vec& x,
                         double eps_h = kDefaultEpsH) {
  SignVector q = p.quality(x, eps_h);
  if (!q.is_consistent()) {
    throw BoundaryStateError("state lies on a separating hypersurface: quality " +
                             q.to_string());
  }
  return reg.label_of(q);
}

/// All 2^N candidate sign vectors in lexicographic order with -1 < +1.
/// Candidates only: nothing here checks that a candidate is nonempty as a
/// region of the state space.
inline std::vector<SignVector> enumerate_candidate_cells(std::size_t n_surfaces) {
  if (n_surfaces > 20) {
    throw CapacityError("candidate enumeration limited to 20 surfaces, got " +
                        std::to_string(n_surfaces));
  }
  const std::size_t total = std::size_t{1} << n_surfaces;
  std::vector<SignVector> out;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<Sign> s(n_surfaces);
    for (std::size_t i = 0; i < n_surfaces; ++i) {
      const bool positive = (code >> (n_surfaces - 1 - i)) & 1u;
      s[i] = positive ? Sign{1} : Sign{-1};
    }
    out.emplace_back(std::move(s));
  }
  return out;
}

inline std::vector<SignVector> enumerate_candidate_cells(const PartitionSpec& p) {
  return enumerate_candidate_cells(p.size());
}

}  // namespace desplant
