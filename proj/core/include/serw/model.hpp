#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "serw/tails.hpp"

namespace serw {

/// Raised when a caller hands an operation a state or argument that breaks
/// its documented preconditions.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Perturbation {
  None,            // plain senile walk, f(m) = m
  Deterministic,   // escape boosted by delta at every step
  Iid,             // escape boosted by delta * xi_n, xi_n i.i.d.
  IndependentSeq,  // as Iid, but xi_n's scale grows with n
};

std::string_view to_string(Perturbation p);
std::optional<Perturbation> parse_perturbation(std::string_view name);

inline constexpr int kMaxDimension = 8;

/// Which walk we are simulating or analysing.
///
/// Invariants: 1 <= dimension <= kMaxDimension, 0 <= delta < 1/2, and
/// perturbation == None exactly when delta == 0.
struct ModelSpec {
  int dimension = 1;
  Perturbation perturbation = Perturbation::None;
  double delta = 0.0;
  TailSpec tail = TailSpec::point_mass();
  ScaleRule scale_rule{};

  static ModelSpec unperturbed(int dimension);
  static ModelSpec deterministic(int dimension, double delta);
  static ModelSpec iid(int dimension, double delta, TailSpec tail);
  static ModelSpec independent_seq(int dimension, double delta, TailSpec tail,
                                   ScaleRule rule = {});

  /// Throws std::invalid_argument naming the broken invariant.
  void validate() const;

  bool stochastic() const noexcept {
    return perturbation == Perturbation::Iid || perturbation == Perturbation::IndependentSeq;
  }

  /// Law of xi_n (n >= 1); the scale rule applies only to IndependentSeq.
  TailSpec xi_law(std::int64_t n) const;
  std::optional<ScaleRule> active_scale_rule() const;

  /// Copy with a different delta. delta == 0 yields the unperturbed model; a
  /// positive delta on an unperturbed model yields the deterministic one.
  ModelSpec with_delta(double new_delta) const;

  /// Short human-readable label, e.g. "d=1 iid(pareto j=0.5) delta=0.01".
  std::string describe() const;
  /// describe() without the delta.
  std::string describe_kernel() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Reinforced weight (1+m)/(2d+m) of re-traversing the current edge.
inline double reinforcement_ratio(std::int64_t m, int dimension) noexcept {
  const double md = static_cast<double>(m);
  return (1.0 + md) / (2.0 * dimension + md);
}

/// Complement (2d-1)/(2d+m), computed directly rather than as 1 - ratio.
inline double reinforcement_complement(std::int64_t m, int dimension) noexcept {
  return (2.0 * dimension - 1.0) / (2.0 * dimension + static_cast<double>(m));
}

}  // namespace serw
