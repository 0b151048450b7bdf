#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace conley::detail {

// Neumaier-compensated running sums, one per upper-triangle entry.
class CompensatedSums {
 public:
  explicit CompensatedSums(std::size_t m) : sum_(m, 0.0), comp_(m, 0.0) {}

  void add(std::size_t k, double v) {
    const double t = sum_[k] + v;
    if (std::abs(sum_[k]) >= std::abs(v)) {
      comp_[k] += (sum_[k] - t) + v;
    } else {
      comp_[k] += (v - t) + sum_[k];
    }
    sum_[k] = t;
  }

  void absorb(const CompensatedSums& other) {
    for (std::size_t k = 0; k < sum_.size(); ++k) add(k, other.value(k));
  }

  double value(std::size_t k) const { return sum_[k] + comp_[k]; }

  void reset() {
    std::fill(sum_.begin(), sum_.end(), 0.0);
    std::fill(comp_.begin(), comp_.end(), 0.0);
  }

 private:
  std::vector<double> sum_;
  std::vector<double> comp_;
};

using UpperEntries = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

inline UpperEntries upper_entries(Eigen::Index p) {
  UpperEntries upper;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) upper.emplace_back(a, b);
  }
  return upper;
}

// Rows of u are e_i * x_i; accumulates sum_i u_i u_i' as one block.
inline void add_diagonal_terms(const Eigen::MatrixXd& u, const UpperEntries& upper,
                               CompensatedSums& total) {
  CompensatedSums block(upper.size());
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (std::size_t k = 0; k < upper.size(); ++k) {
      block.add(k, u(i, upper[k].first) * u(i, upper[k].second));
    }
  }
  total.absorb(block);
}

inline Eigen::MatrixXd to_symmetric(const CompensatedSums& sums, const UpperEntries& upper,
                                    Eigen::Index p) {
  Eigen::MatrixXd m(p, p);
  for (std::size_t k = 0; k < upper.size(); ++k) {
    const auto [a, b] = upper[k];
    m(a, b) = sums.value(k);
    m(b, a) = m(a, b);
  }
  return m;
}

}  // namespace conley::detail
