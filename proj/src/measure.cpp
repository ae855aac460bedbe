#include "mmot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mmot/errors.hpp"

namespace mmot {

namespace {

constexpr double kMassTol = 1e-12;

void check_points(const std::vector<Vector>& points, int dim) {
  for (const auto& p : points) {
    if (p.size() != dim)
      throw ValidationError("inconsistent point dimension in measure");
    if (!p.allFinite()) throw ValidationError("non-finite coordinate in measure");
  }
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Vector> points,
                                 std::vector<double> weights) {
  if (points.size() != weights.size())
    throw ValidationError("points/weights size mismatch");
  if (points.empty()) throw ValidationError("empty measure");
  dim_ = static_cast<int>(points.front().size());
  if (dim_ < 1) throw ValidationError("zero-dimensional measure");
  check_points(points, dim_);

  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (!std::isfinite(w) || w < 0.0)
      throw ValidationError("negative or non-finite weight in measure");
    if (w == 0.0) continue;  // dropped
    points_.push_back(std::move(points[k]));
    weights_.push_back(w);
    total += w;
  }
  if (points_.empty()) throw ValidationError("measure has no positive mass");
  if (std::abs(total - 1.0) > kMassTol)
    throw ValidationError("weights do not sum to 1 (got " +
                          std::to_string(total) + ")");
}

DiscreteMeasure DiscreteMeasure::dirac(Vector x) {
  std::vector<Vector> pts;
  pts.push_back(std::move(x));
  return DiscreteMeasure(std::move(pts), {1.0});
}

DiscreteMeasure DiscreteMeasure::normalized(std::vector<Vector> points,
                                            std::vector<double> weights,
                                            double* rescale) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw ValidationError("non-finite weight");
    if (w < 0.0) throw ValidationError("negative weight");
    total += w;
  }
  if (total <= 0.0) throw ValidationError("nonpositive total mass");
  for (double& w : weights) w /= total;
  if (rescale) *rescale = 1.0 / total;
  return DiscreteMeasure(std::move(points), std::move(weights));
}

std::pair<Vector, Vector> DiscreteMeasure::bounding_box() const {
  Vector lo = points_.front();
  Vector hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

DiscreteMeasure DiscreteMeasure::canonical() const {
  std::vector<int> order(points_.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const Vector& pa = points_[a];
    const Vector& pb = points_[b];
    for (int d = 0; d < dim_; ++d) {
      if (pa[d] != pb[d]) return pa[d] < pb[d];
    }
    return weights_[a] < weights_[b];
  });
  std::vector<Vector> pts;
  std::vector<double> ws;
  pts.reserve(order.size());
  ws.reserve(order.size());
  for (int k : order) {
    pts.push_back(points_[k]);
    ws.push_back(weights_[k]);
  }
  return DiscreteMeasure(std::move(pts), std::move(ws));
}

bool DiscreteMeasure::approx_equal(const DiscreteMeasure& other,
                                   double tol) const {
  if (size() != other.size() || dim() != other.dim()) return false;
  for (int k = 0; k < size(); ++k) {
    if ((points_[k] - other.points_[k]).lpNorm<Eigen::Infinity>() > tol)
      return false;
    if (std::abs(weights_[k] - other.weights_[k]) > tol) return false;
  }
  return true;
}

void MeasureAccumulator::add(const Vector& x, double w) {
  if (!x.allFinite())
    throw ValidationError("map produced a non-finite image point");
  if (!(w > 0.0)) {
    if (w == 0.0) return;
    throw ValidationError("accumulated weight must be nonnegative");
  }
  total_ += w;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if ((points_[k] - x).norm() <= merge_tol_) {
      // mass-weighted average keeps the merged atom between the two images
      const double wk = weights_[k];
      points_[k] = (wk * points_[k] + w * x) / (wk + w);
      weights_[k] += w;
      return;
    }
  }
  points_.push_back(x);
  weights_.push_back(w);
}

DiscreteMeasure MeasureAccumulator::take(double* rescale) {
  return DiscreteMeasure::normalized(std::move(points_), std::move(weights_),
                                     rescale);
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu,
                            const std::function<Vector(const Vector&)>& map,
                            double merge_tol) {
  MeasureAccumulator acc(merge_tol);
  for (int k = 0; k < mu.size(); ++k) acc.add(map(mu.point(k)), mu.weight(k));
  return acc.take();
}

namespace {

double parse_double(const std::string& token, int row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("malformed value '" + token + "' at row " +
                          std::to_string(row));
  }
}

}  // namespace

DiscreteMeasure load_measure_csv(const std::string& path, LoadInfo* info) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open measure file: " + path);

  std::vector<Vector> points;
  std::vector<double> weights;
  int dim = -1;
  int row = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++row;
    // strip whitespace-only lines
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      const auto b = tok.find_first_not_of(" \t\r");
      const auto e = tok.find_last_not_of(" \t\r");
      if (b == std::string::npos)
        throw ValidationError("malformed row " + std::to_string(row));
      vals.push_back(parse_double(tok.substr(b, e - b + 1), row));
    }
    if (vals.size() < 2)
      throw ValidationError("malformed row " + std::to_string(row) +
                            ": need n coordinates and a weight");
    if (dim < 0) dim = static_cast<int>(vals.size()) - 1;
    if (static_cast<int>(vals.size()) != dim + 1)
      throw ValidationError("inconsistent dimension at row " +
                            std::to_string(row));
    Vector p(dim);
    for (int d = 0; d < dim; ++d) {
      if (std::isnan(vals[d]))
        throw ValidationError("NaN entry at row " + std::to_string(row));
      p[d] = vals[d];
    }
    const double w = vals.back();
    if (std::isnan(w))
      throw ValidationError("NaN entry at row " + std::to_string(row));
    if (w < 0.0)
      throw ValidationError("nonpositive weight at row " + std::to_string(row));
    points.push_back(std::move(p));
    weights.push_back(w);
  }
  if (points.empty()) throw ValidationError("empty measure file: " + path);

  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) throw ValidationError("nonpositive total mass in " + path);
  if (info) {
    info->total_mass = total;
    info->rescale = 1.0 / total;
  }
  double rescale = 1.0;
  auto mu = DiscreteMeasure::normalized(std::move(points), std::move(weights),
                                        &rescale);
  return mu;
}

DiscreteMeasure load_measure_json(const std::string& path, LoadInfo* info) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open measure file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid JSON in " + path + ": " + e.what());
  }
  if (!j.contains("dim") || !j.contains("atoms"))
    throw ValidationError("measure JSON needs 'dim' and 'atoms'");
  const int dim = j["dim"].get<int>();
  std::vector<Vector> points;
  std::vector<double> weights;
  int row = 0;
  for (const auto& atom : j["atoms"]) {
    ++row;
    if (!atom.contains("x") || !atom.contains("w"))
      throw ValidationError("atom " + std::to_string(row) +
                            " needs 'x' and 'w'");
    const auto& xs = atom["x"];
    if (static_cast<int>(xs.size()) != dim)
      throw ValidationError("inconsistent dimension at atom " +
                            std::to_string(row));
    Vector p(dim);
    for (int d = 0; d < dim; ++d) {
      p[d] = xs[d].get<double>();
      if (std::isnan(p[d]))
        throw ValidationError("NaN entry at atom " + std::to_string(row));
    }
    const double w = atom["w"].get<double>();
    if (std::isnan(w))
      throw ValidationError("NaN entry at atom " + std::to_string(row));
    if (w < 0.0)
      throw ValidationError("nonpositive weight at atom " +
                            std::to_string(row));
    points.push_back(std::move(p));
    weights.push_back(w);
  }
  if (points.empty()) throw ValidationError("empty atom list in " + path);
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) throw ValidationError("nonpositive total mass in " + path);
  if (info) {
    info->total_mass = total;
    info->rescale = 1.0 / total;
  }
  return DiscreteMeasure::normalized(std::move(points), std::move(weights));
}

DiscreteMeasure load_measure(const std::string& path, const std::string& format,
                             LoadInfo* info) {
  if (format == "csv") return load_measure_csv(path, info);
  if (format == "json") return load_measure_json(path, info);
  throw ValidationError("unknown measure format: " + format);
}

void save_measure_csv(const DiscreteMeasure& mu, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  char buf[64];
  for (int k = 0; k < mu.size(); ++k) {
    for (int d = 0; d < mu.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g", mu.point(k)[d]);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof(buf), "%.17g", mu.weight(k));
    out << buf << '\n';
  }
}

void save_measure_json(const DiscreteMeasure& mu, const std::string& path) {
  nlohmann::ordered_json j;
  j["dim"] = mu.dim();
  auto& atoms = j["atoms"];
  atoms = nlohmann::ordered_json::array();
  for (int k = 0; k < mu.size(); ++k) {
    nlohmann::ordered_json atom;
    atom["x"] = std::vector<double>(mu.point(k).data(),
                                    mu.point(k).data() + mu.dim());
    atom["w"] = mu.weight(k);
    atoms.push_back(atom);
  }
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace mmot
