#include "mmot/coupling.hpp"

#include <cmath>

#include "mmot/errors.hpp"

namespace mmot {

TupleIndexer::TupleIndexer(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw ValidationError("empty size list");
  strides_.assign(sizes_.size(), 1);
  long s = 1;
  for (int i = static_cast<int>(sizes_.size()) - 1; i >= 0; --i) {
    if (sizes_[i] < 1) throw ValidationError("nonpositive support size");
    strides_[i] = s;
    s *= sizes_[i];
  }
  count_ = s;
}

std::vector<int> TupleIndexer::tuple(long linear) const {
  std::vector<int> out(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    out[i] = static_cast<int>(linear / strides_[i]);
    linear %= strides_[i];
  }
  return out;
}

long TupleIndexer::linear(const std::vector<int>& tuple) const {
  long out = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i)
    out += strides_[i] * tuple[i];
  return out;
}

double Coupling::total_mass() const {
  double t = 0.0;
  for (const auto& e : entries) t += e.mass;
  return t;
}

std::vector<Vector> Coupling::tuple_points(const CouplingEntry& e) const {
  std::vector<Vector> pts;
  pts.reserve(marginals.size());
  for (std::size_t i = 0; i < marginals.size(); ++i)
    pts.push_back(marginals[i].point(e.idx[i]));
  return pts;
}

std::vector<double> marginal_masses(const Coupling& c, int i) {
  if (i < 0 || i >= c.arity())
    throw ValidationError("marginal index out of range");
  std::vector<double> mass(c.marginals[i].size(), 0.0);
  for (const auto& e : c.entries) mass[e.idx[i]] += e.mass;
  return mass;
}

DiscreteMeasure marginal(const Coupling& c, int i) {
  const auto mass = marginal_masses(c, i);
  std::vector<Vector> pts;
  std::vector<double> ws;
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (mass[k] <= 0.0) continue;
    pts.push_back(c.marginals[i].point(static_cast<int>(k)));
    ws.push_back(mass[k]);
  }
  return DiscreteMeasure::normalized(std::move(pts), std::move(ws));
}

double marginal_violation(const Coupling& c) {
  double worst = 0.0;
  for (int i = 0; i < c.arity(); ++i) {
    const auto mass = marginal_masses(c, i);
    for (int k = 0; k < c.marginals[i].size(); ++k)
      worst = std::max(worst, std::abs(mass[k] - c.marginals[i].weight(k)));
  }
  return worst;
}

void validate_coupling(const Coupling& c, double total_tol) {
  if (c.arity() < 2) throw ValidationError("coupling needs m >= 2 marginals");
  if (c.entries.empty()) throw ValidationError("coupling has no entries");
  for (const auto& e : c.entries) {
    if (static_cast<int>(e.idx.size()) != c.arity())
      throw ValidationError("coupling entry arity mismatch");
    for (int i = 0; i < c.arity(); ++i)
      if (e.idx[i] < 0 || e.idx[i] >= c.marginals[i].size())
        throw ValidationError("coupling entry index out of range");
    if (!(e.mass > 0.0) || !std::isfinite(e.mass))
      throw ValidationError("coupling entry mass must be positive");
  }
  if (std::abs(c.total_mass() - 1.0) > total_tol)
    throw ValidationError("coupling total mass is not 1");
}

DiscreteMeasure pushforward(
    const Coupling& c,
    const std::function<Vector(const std::vector<Vector>&)>& map,
    double merge_tol) {
  MeasureAccumulator acc(merge_tol);
  for (const auto& e : c.entries) acc.add(map(c.tuple_points(e)), e.mass);
  return acc.take();
}

}  // namespace mmot
