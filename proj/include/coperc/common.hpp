#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace coperc {

using Vec2 = Eigen::Vector2d;

// Rows are CAVs (row index == vehicle id), columns are grid ids.
using DensityMatrix = Eigen::MatrixXd;

// Sorted, duplicate-free grid ids.
using GridSet = std::vector<int>;

using Rng = std::mt19937_64;

GridSet set_union(const GridSet& a, const GridSet& b);
GridSet set_intersection(const GridSet& a, const GridSet& b);

// Named RNG substreams forked from one run seed. Draws from one stream never
// perturb another.
enum class Stream : std::uint64_t { kMobility = 1, kChannel = 2, kRandomSchedule = 3 };

Rng make_stream(std::uint64_t seed, Stream stream);

// Counter-based uniform in (0, 1): identical keys give identical values in
// every process.
double hashed_uniform(std::initializer_list<std::uint64_t> key);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace coperc
