#include "serw/walk.hpp"

#include <cstdlib>

namespace serw {

WalkState WalkState::origin(int dimension) {
  if (dimension < 1 || dimension > kMaxDimension)
    throw ContractViolation("WalkState: dimension out of range");
  WalkState s;
  s.dimension_ = dimension;
  return s;
}

WalkState WalkState::from_parts(int dimension, const Coordinates& position,
                                std::optional<Edge> last_edge, std::int64_t m,
                                std::int64_t step_count) {
  WalkState s = origin(dimension);
  for (int i = dimension; i < kMaxDimension; ++i) {
    if (position[i] != 0) throw ContractViolation("WalkState: coordinate beyond dimension");
  }
  s.position_ = position;
  s.step_count_ = step_count;
  if (step_count < 0) throw ContractViolation("WalkState: negative step count");
  if (last_edge.has_value() != (step_count >= 1))
    throw ContractViolation("WalkState: last edge must be present exactly after the first step");
  if (!last_edge) {
    if (m != 0) throw ContractViolation("WalkState: m must be 0 before the first step");
    return s;
  }
  if (m < 1 || m > step_count) throw ContractViolation("WalkState: m must lie in [1, step_count]");

  const Edge& e = *last_edge;
  const Coordinates* other = nullptr;
  if (e.a == position) other = &e.b;
  else if (e.b == position) other = &e.a;
  if (other == nullptr) throw ContractViolation("WalkState: last edge does not touch position");

  int axis = -1;
  std::int64_t diff = 0;
  for (int i = 0; i < kMaxDimension; ++i) {
    const std::int64_t d = (*other)[i] - position[i];
    if (d == 0) continue;
    if (axis >= 0 || std::llabs(d) != 1 || i >= dimension)
      throw ContractViolation("WalkState: last edge endpoints are not lattice neighbours");
    axis = i;
    diff = d;
  }
  if (axis < 0) throw ContractViolation("WalkState: degenerate last edge");
  s.back_move_ = 2 * axis + (diff > 0 ? 0 : 1);
  s.m_ = m;
  return s;
}

std::optional<Edge> WalkState::last_edge() const {
  if (back_move_ < 0) return std::nullopt;
  Edge e{position_, position_};
  e.b[move_axis(back_move_)] += move_sign(back_move_);
  return e;
}

double effective_perturbation(const WalkState& state, const ModelSpec& model,
                              std::optional<double> xi) {
  const bool needs_xi = model.stochastic() && state.step_count() >= 1;
  if (xi.has_value() != needs_xi)
    throw ContractViolation(needs_xi ? "xi required for a stochastic model after the first step"
                                     : "xi given where the kernel takes none");
  if (xi && !(*xi >= 0.0)) throw ContractViolation("xi must be non-negative");
  switch (model.perturbation) {
    case Perturbation::None: return 0.0;
    case Perturbation::Deterministic: return model.delta;
    case Perturbation::Iid:
    case Perturbation::IndependentSeq: return xi ? model.delta * *xi : 0.0;
  }
  return 0.0;
}

std::vector<double> transition_probabilities(const WalkState& state, const ModelSpec& model,
                                             std::optional<double> xi) {
  if (state.dimension() != model.dimension)
    throw ContractViolation("transition_probabilities: state and model dimensions differ");
  const double eps = effective_perturbation(state, model, xi);
  const int n_moves = 2 * model.dimension;
  if (state.back_move() < 0) return std::vector<double>(n_moves, 1.0 / n_moves);

  const double keep = continue_probability(state.m(), model.dimension, eps);
  std::vector<double> probs(n_moves, (1.0 - keep) / (n_moves - 1));
  probs[state.back_move()] = keep;
  return probs;
}

}  // namespace serw
