#pragma once

#include <optional>
#include <string>

#include "gpgrad/dgp.hpp"
#include "gpgrad/gp.hpp"

namespace gpgrad {

// A fitted surrogate plus the affine input map and response standardization
// that connect user coordinates to the fitting domain.
struct FittedModel {
  std::string model;  // gp | gegp | dgp | gedgp
  std::optional<GpChain> gp;
  std::optional<DgpChain> dgp;
  Eigen::VectorXd x_lo, x_hi;
  double y_center = 0.0;
  double y_scale = 1.0;

  bool is_deep() const { return dgp.has_value(); }
  int D() const { return static_cast<int>(x_lo.size()); }
};

// Versioned text state file: header (sizes, flags, settings, scaling), then
// training data and per-iteration records in retained order.  Round-trips
// without loss.
void save_model(const std::string& path, const FittedModel& m);
FittedModel load_model(const std::string& path);

}  // namespace gpgrad
