#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "serw/model.hpp"
#include "serw/rng.hpp"

namespace serw {

using Coordinates = std::array<std::int64_t, kMaxDimension>;

/// Undirected nearest-neighbour edge; endpoint order carries no meaning.
struct Edge {
  Coordinates a{};
  Coordinates b{};

  friend bool operator==(const Edge& x, const Edge& y) noexcept {
    return (x.a == y.a && x.b == y.b) || (x.a == y.b && x.b == y.a);
  }
};

// Moves are indexed 0 .. 2d-1: move k shifts axis k/2 by +1 (k even) or -1
// (k odd). The reverse of move k is k ^ 1.
constexpr int move_axis(int move) noexcept { return move >> 1; }
constexpr std::int64_t move_sign(int move) noexcept { return (move & 1) ? -1 : 1; }
constexpr int reverse_move(int move) noexcept { return move ^ 1; }

/// Position, last traversed edge and consecutive-traversal count m_n.
class WalkState {
 public:
  static WalkState origin(int dimension);

  /// Builds a state from explicit parts, checking every invariant. Throws
  /// ContractViolation on a malformed edge or an inconsistent count.
  static WalkState from_parts(int dimension, const Coordinates& position,
                              std::optional<Edge> last_edge, std::int64_t m,
                              std::int64_t step_count);

  int dimension() const noexcept { return dimension_; }
  std::span<const std::int64_t> position() const noexcept {
    return {position_.data(), static_cast<std::size_t>(dimension_)};
  }
  const Coordinates& coordinates() const noexcept { return position_; }
  std::optional<Edge> last_edge() const;
  /// Consecutive traversals of the last edge; 0 before the first step.
  std::int64_t m() const noexcept { return m_; }
  std::int64_t step_count() const noexcept { return step_count_; }
  /// Move index that re-traverses the last edge, or -1 before the first step.
  int back_move() const noexcept { return back_move_; }

  std::int64_t squared_norm() const noexcept {
    std::int64_t s = 0;
    for (int i = 0; i < dimension_; ++i) s += position_[i] * position_[i];
    return s;
  }

  /// Applies one move in place.
  void apply(int move) noexcept {
    position_[move_axis(move)] += move_sign(move);
    m_ = (move == back_move_) ? m_ + 1 : 1;
    back_move_ = reverse_move(move);
    ++step_count_;
  }

  friend bool operator==(const WalkState&, const WalkState&) = default;

 private:
  WalkState() = default;

  int dimension_ = 1;
  int back_move_ = -1;
  Coordinates position_{};
  std::int64_t m_ = 0;
  std::int64_t step_count_ = 0;
};

/// Re-traversal probability with effective perturbation eps (delta for the
/// deterministic model, delta * xi for the stochastic ones), clamped at zero.
inline double continue_probability(std::int64_t m, int dimension, double eps) noexcept {
  return std::max(reinforcement_ratio(m, dimension) - eps, 0.0);
}

/// Effective perturbation for the step leaving `state`; 0 for unperturbed
/// models. `xi` must be present iff the model is stochastic and a step has
/// already been taken.
double effective_perturbation(const WalkState& state, const ModelSpec& model,
                              std::optional<double> xi);

/// Probability of each of the 2d moves out of `state`.
std::vector<double> transition_probabilities(const WalkState& state, const ModelSpec& model,
                                             std::optional<double> xi = std::nullopt);

/// Picks a move from a uniform draw given the continue probability. The
/// first step is uniform; later steps re-traverse with probability
/// `continue_p` and otherwise pick one of the other 2d-1 moves uniformly.
inline int choose_move(const WalkState& state, double continue_p, double u) noexcept {
  const int n_moves = 2 * state.dimension();
  if (state.back_move() < 0) return std::min(static_cast<int>(u * n_moves), n_moves - 1);
  if (u < continue_p) return state.back_move();
  const double r = (u - continue_p) / (1.0 - continue_p);
  const int idx = std::min(static_cast<int>(r * (n_moves - 1)), n_moves - 2);
  return idx < state.back_move() ? idx : idx + 1;
}

/// Continue probability for the step leaving `state`, drawing xi_n from
/// `draw.xi` when the model needs one. Zero before the first step.
inline double step_continue_probability(const WalkState& state, const ModelSpec& model,
                                        const StepDraw& draw) {
  if (state.back_move() < 0) return 0.0;
  double eps = 0.0;
  switch (model.perturbation) {
    case Perturbation::None: break;
    case Perturbation::Deterministic: eps = model.delta; break;
    case Perturbation::Iid: eps = model.delta * model.tail.quantile(draw.xi); break;
    case Perturbation::IndependentSeq:
      eps = model.delta * sample(model.tail, state.step_count(), model.scale_rule, draw.xi);
      break;
  }
  return continue_probability(state.m(), model.dimension, eps);
}

/// Advances `state` in place and returns the move taken.
inline int advance(WalkState& state, const ModelSpec& model, const StepDraw& draw) {
  const int move = choose_move(state, step_continue_probability(state, model, draw), draw.move);
  state.apply(move);
  return move;
}

/// One step of the walk as a pure function of (state, model, draw).
inline WalkState step(const WalkState& state, const ModelSpec& model, const StepDraw& draw) {
  WalkState next = state;
  advance(next, model, draw);
  return next;
}

/// One step consuming the next draw from a stream.
template <class Stream>
WalkState step(const WalkState& state, const ModelSpec& model, Stream& rng) {
  return step(state, model, rng.next_draw());
}

}  // namespace serw
