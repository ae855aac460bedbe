#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mmot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance for deciding that two image atoms coincide.
inline constexpr double kMergeTol = 1e-9;

/// Finitely supported probability measure on R^n.
///
/// Invariants, enforced at construction:
///  - weights sum to 1 within 1e-12,
///  - every kept atom has weight > 0 (zero-weight atoms are dropped),
///  - all points share the dimension and contain no NaN/Inf entries.
class DiscreteMeasure {
 public:
  /// Empty placeholder state; every factory and the checked constructor
  /// produce nonempty normalized measures.
  DiscreteMeasure() = default;

  DiscreteMeasure(std::vector<Vector> points, std::vector<double> weights);

  static DiscreteMeasure dirac(Vector x);

  /// Rescales arbitrary nonnegative weights to total mass 1.
  /// Throws ValidationError if the total is not strictly positive.
  /// The applied factor (1/total) is written to *rescale when given.
  static DiscreteMeasure normalized(std::vector<Vector> points,
                                    std::vector<double> weights,
                                    double* rescale = nullptr);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(points_.size()); }

  const Vector& point(int k) const { return points_[k]; }
  double weight(int k) const { return weights_[k]; }
  const std::vector<Vector>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Componentwise (lo, hi) over the support.
  std::pair<Vector, Vector> bounding_box() const;

  /// Copy with atoms in lexicographic coordinate order, ties by weight.
  DiscreteMeasure canonical() const;

  /// L-inf distance between the supports seen as weighted atom lists;
  /// requires equal size and matching order.
  bool approx_equal(const DiscreteMeasure& other, double tol) const;

 private:
  std::vector<Vector> points_;
  std::vector<double> weights_;
  int dim_ = 0;
};

/// Collects weighted image points, merging atoms that land within
/// `merge_tol` of an existing one (mass added, location mass-averaged).
class MeasureAccumulator {
 public:
  explicit MeasureAccumulator(double merge_tol = kMergeTol)
      : merge_tol_(merge_tol) {}

  void add(const Vector& x, double w);

  /// Total mass accumulated so far.
  double total() const { return total_; }

  /// Finishes and normalizes into a measure. Total mass is preserved
  /// exactly up to the final rescale, which is reported via *rescale.
  DiscreteMeasure take(double* rescale = nullptr);

 private:
  std::vector<Vector> points_;
  std::vector<double> weights_;
  double merge_tol_;
  double total_ = 0.0;
};

/// Image measure under a pointwise map; coinciding images merge.
DiscreteMeasure pushforward(const DiscreteMeasure& mu,
                            const std::function<Vector(const Vector&)>& map,
                            double merge_tol = kMergeTol);

struct LoadInfo {
  double total_mass = 1.0;  // mass before normalization
  double rescale = 1.0;     // factor applied to each weight
};

/// Reads "x_1,...,x_n,w" rows (no header, '.' decimal). The dimension is
/// inferred from the first row and must stay consistent. Weights are
/// normalized to total mass 1; errors carry the 1-based row number.
DiscreteMeasure load_measure_csv(const std::string& path,
                                 LoadInfo* info = nullptr);

/// JSON manifest form: { "dim": n, "atoms": [ { "x": [...], "w": ... } ] }.
DiscreteMeasure load_measure_json(const std::string& path,
                                  LoadInfo* info = nullptr);

DiscreteMeasure load_measure(const std::string& path, const std::string& format,
                             LoadInfo* info = nullptr);

void save_measure_csv(const DiscreteMeasure& mu, const std::string& path);
void save_measure_json(const DiscreteMeasure& mu, const std::string& path);

}  // namespace mmot
