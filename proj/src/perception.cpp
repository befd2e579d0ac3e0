#include "coperc/perception.hpp"

#include <string>

#include "coperc/channel.hpp"
#include "coperc/coalition.hpp"

namespace coperc {

DensityMatrix fuse_uploads(const Schedule& schedule, const DensityMatrix& rho) {
  DensityMatrix fused = rho;
  for (const auto& u : schedule.uploads()) {
    fused(u.receiver, u.grid) += rho(u.sender, u.grid);
  }
  return fused;
}

DensityMatrix fuse_effective_density(const Schedule& schedule, const DensityMatrix& rho,
                                     const Partition& partition) {
  for (const auto& u : schedule.uploads()) {
    const int c = partition.coalition_of(u.sender);
    if (c < 0 || partition.coalitions[static_cast<std::size_t>(c)].leader != u.receiver ||
        u.sender == u.receiver) {
      throw StructuralError("upload " + std::to_string(u.sender) + " -> " +
                            std::to_string(u.receiver) + " is not member -> own leader");
    }
  }
  return fuse_uploads(schedule, rho);
}

double late_fusion_utility(int grid, const DensityMatrix& fused, const Curve& curve) {
  if (fused.rows() == 0) return 0.0;
  return curve.apply(fused.col(grid).array()).maxCoeff();
}

double region_utility(const GridSet& region, const Eigen::VectorXd& field) {
  double total = 0.0;
  for (int g : region) total += field[g];
  return total;
}

double vehicle_utility(int cav, const DensityMatrix& fused, const std::vector<GridSet>& req,
                       const Curve& curve) {
  return region_utility(req[static_cast<std::size_t>(cav)], late_fusion_field(fused, curve));
}

Eigen::VectorXd cav_utilities(const DensityMatrix& fused, const std::vector<GridSet>& req,
                              const Curve& curve) {
  const Eigen::VectorXd field = late_fusion_field(fused, curve);
  Eigen::VectorXd out(static_cast<Eigen::Index>(req.size()));
  for (std::size_t i = 0; i < req.size(); ++i) out[static_cast<Eigen::Index>(i)] = region_utility(req[i], field);
  return out;
}

double system_utility(const DensityMatrix& fused, const std::vector<GridSet>& req,
                      const Curve& curve) {
  return cav_utilities(fused, req, curve).sum();
}

Eigen::VectorXd isolated_utilities(const DensityMatrix& rho, const std::vector<GridSet>& req,
                                   const Curve& curve) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(req.size()));
  for (std::size_t i = 0; i < req.size(); ++i) {
    double total = 0.0;
    for (int g : req[i]) total += curve(rho(static_cast<Eigen::Index>(i), g));
    out[static_cast<Eigen::Index>(i)] = total;
  }
  return out;
}

}  // namespace coperc
