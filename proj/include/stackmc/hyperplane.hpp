#pragma once

#include <Eigen/Dense>

namespace stackmc {

/// Half-space {x : a.x + a0 >= 0}.
struct TruncationHyperplane {
  double a0 = 0.0;
  Eigen::VectorXd a;

  double side(const Eigen::Ref<const Eigen::VectorXd>& x) const { return a.dot(x) + a0; }
};

}  // namespace stackmc
