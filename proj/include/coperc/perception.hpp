#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "coperc/common.hpp"

namespace coperc {

class Schedule;
struct Partition;

/// Saturating exponential detection utility f(rho) = f_max (1 - exp(-lambda rho)).
///
/// The rate is calibrated so that f(rho_th) = (1 - epsilon) f_max: grids at
/// or above rho_th count as saturated.
template <typename Scalar = double>
struct UtilityCurve {
  Scalar f_max = 1.0;
  Scalar rho_th = 2.0;
  Scalar epsilon = 0.05;
  Scalar lambda = std::log(Scalar(1) / Scalar(0.05)) / Scalar(2);

  static UtilityCurve calibrated(Scalar f_max, Scalar rho_th, Scalar epsilon) {
    if (!(f_max > 0) || !(rho_th > 0) || !(epsilon > 0 && epsilon < 1))
      throw std::invalid_argument("utility curve: need f_max > 0, rho_th > 0, 0 < epsilon < 1");
    return {f_max, rho_th, epsilon, std::log(Scalar(1) / epsilon) / rho_th};
  }

  Scalar operator()(Scalar rho) const {
    if (rho < Scalar(0)) throw std::domain_error("utility: negative density");
    return f_max * -std::expm1(-lambda * rho);
  }

  // Coefficient-wise evaluation; no sign check.
  template <typename Derived>
  auto apply(const Eigen::ArrayBase<Derived>& rho) const {
    return f_max * (Scalar(1) - (-lambda * rho).exp());
  }
};

using Curve = UtilityCurve<double>;

/// Fuses every upload into its receiver: rho_hat = rho plus the sum over
/// scheduled (sender, grid, subchannel) of the sender's raw density.
DensityMatrix fuse_uploads(const Schedule& schedule, const DensityMatrix& rho);

class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Leader-only fusion: uploads must go from a coalition member to its own
/// leader, otherwise StructuralError. Non-leaders keep their raw density.
DensityMatrix fuse_effective_density(const Schedule& schedule, const DensityMatrix& rho,
                                     const Partition& partition);

// F_g = max_k f(rho_hat_{k,g}) for every grid.
template <typename Derived>
Eigen::VectorXd late_fusion_field(const Eigen::MatrixBase<Derived>& fused, const Curve& curve) {
  if (fused.rows() == 0) return Eigen::VectorXd::Zero(fused.cols());
  return curve.apply(fused.array()).colwise().maxCoeff().transpose();
}

double late_fusion_utility(int grid, const DensityMatrix& fused, const Curve& curve);

// Sum of the late-fusion field over one requirement region.
double region_utility(const GridSet& region, const Eigen::VectorXd& field);

double vehicle_utility(int cav, const DensityMatrix& fused, const std::vector<GridSet>& req,
                       const Curve& curve);

// Sum over CAVs of vehicle_utility.
double system_utility(const DensityMatrix& fused, const std::vector<GridSet>& req,
                      const Curve& curve);

// Per-CAV utilities with late fusion.
Eigen::VectorXd cav_utilities(const DensityMatrix& fused, const std::vector<GridSet>& req,
                              const Curve& curve);

// Per-CAV utilities when each vehicle only sees its own density.
Eigen::VectorXd isolated_utilities(const DensityMatrix& rho, const std::vector<GridSet>& req,
                                   const Curve& curve);

}  // namespace coperc
