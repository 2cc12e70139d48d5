#include "serw/model.hpp"

#include <cmath>
#include <sstream>

namespace serw {

std::string_view to_string(Perturbation p) {
  switch (p) {
    case Perturbation::None: return "none";
    case Perturbation::Deterministic: return "deterministic";
    case Perturbation::Iid: return "iid";
    case Perturbation::IndependentSeq: return "independent_seq";
  }
  return "unknown";
}

std::optional<Perturbation> parse_perturbation(std::string_view name) {
  for (auto p : {Perturbation::None, Perturbation::Deterministic, Perturbation::Iid,
                 Perturbation::IndependentSeq}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

ModelSpec ModelSpec::unperturbed(int dimension) {
  ModelSpec m;
  m.dimension = dimension;
  m.validate();
  return m;
}

ModelSpec ModelSpec::deterministic(int dimension, double delta) {
  ModelSpec m;
  m.dimension = dimension;
  m.perturbation = Perturbation::Deterministic;
  m.delta = delta;
  m.validate();
  return m;
}

ModelSpec ModelSpec::iid(int dimension, double delta, TailSpec tail) {
  ModelSpec m;
  m.dimension = dimension;
  m.perturbation = Perturbation::Iid;
  m.delta = delta;
  m.tail = tail;
  m.validate();
  return m;
}

ModelSpec ModelSpec::independent_seq(int dimension, double delta, TailSpec tail, ScaleRule rule) {
  ModelSpec m;
  m.dimension = dimension;
  m.perturbation = Perturbation::IndependentSeq;
  m.delta = delta;
  m.tail = tail;
  m.scale_rule = rule;
  m.validate();
  return m;
}

void ModelSpec::validate() const {
  if (dimension < 1 || dimension > kMaxDimension)
    throw std::invalid_argument("model: dimension must lie in [1, " +
                                std::to_string(kMaxDimension) + "]");
  if (!(delta >= 0.0 && delta < 0.5))
    throw std::invalid_argument("model: delta must lie in [0, 0.5)");
  if ((perturbation == Perturbation::None) != (delta == 0.0))
    throw std::invalid_argument("model: perturbation 'none' is required exactly when delta == 0");
  if (perturbation == Perturbation::IndependentSeq && !std::isfinite(scale_rule.exponent))
    throw std::invalid_argument("model: scale_rule exponent must be finite");
}

TailSpec ModelSpec::xi_law(std::int64_t n) const {
  if (perturbation == Perturbation::IndependentSeq) return tail.scaled(scale_rule.factor(n));
  return tail;
}

std::optional<ScaleRule> ModelSpec::active_scale_rule() const {
  if (perturbation == Perturbation::IndependentSeq) return scale_rule;
  return std::nullopt;
}

ModelSpec ModelSpec::with_delta(double new_delta) const {
  ModelSpec m = *this;
  m.delta = new_delta;
  if (new_delta == 0.0) {
    m.perturbation = Perturbation::None;
  } else if (perturbation == Perturbation::None) {
    m.perturbation = Perturbation::Deterministic;
  }
  m.validate();
  return m;
}

std::string ModelSpec::describe() const {
  std::ostringstream out;
  out << describe_kernel() << " delta=" << delta;
  return out.str();
}

std::string ModelSpec::describe_kernel() const {
  std::ostringstream out;
  out << "d=" << dimension << ' ' << to_string(perturbation);
  if (stochastic()) {
    out << '(' << to_string(tail.family());
    switch (tail.family()) {
      case TailFamily::HalfCauchy: out << " gamma=" << tail.parameter(); break;
      case TailFamily::Pareto: out << " j=" << tail.parameter(); break;
      case TailFamily::Exponential: out << " rate=" << tail.parameter(); break;
      default: break;
    }
    if (perturbation == Perturbation::IndependentSeq) out << " s_n=n^" << scale_rule.exponent;
    out << ')';
  }
  return out.str();
}

}  // namespace serw
