#pragma once

#include <Eigen/Dense>

namespace gotedit {

enum class WeightRole { semantic, perturbation, projected, combined };

// Length-C channel weights of the localization head.
struct WeightVector {
  Eigen::VectorXd w;
  WeightRole role = WeightRole::semantic;

  int size() const { return static_cast<int>(w.size()); }
};

}  // namespace gotedit
