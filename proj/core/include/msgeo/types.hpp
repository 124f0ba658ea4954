#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace msgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;  // rows are points, cols are coordinates

// Closed Euclidean ball. Scaled balls C*B keep the center and multiply the
// radius.
struct Ball {
  Vec center;
  double radius = 0.0;

  Ball() = default;
  Ball(Vec c, double r) : center(std::move(c)), radius(r) {
    if (!(radius > 0.0)) throw std::invalid_argument("Ball: radius must be positive");
  }

  Ball scaled(double s) const { return Ball(center, radius * s); }

  bool contains(const Eigen::Ref<const Vec>& x) const {
    return (x - center).norm() <= radius;
  }

  // diam(B) is taken to be 2r exactly, so normalized-gap prefactors are 1/r.
  double diam() const { return 2.0 * radius; }
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msgeo
