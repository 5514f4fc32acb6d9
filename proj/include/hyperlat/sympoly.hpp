#pragma once

#include <span>
#include <vector>

#include "hyperlat/base.hpp"

namespace hyperlat::sympoly {

// Query for e_degree(coords): the sum over all degree-subsets of coordinate
// products. Coordinates are positive exact integers.
struct SymPolyQuery {
  int degree = 1;
  std::vector<u64> coords;
};

// Evaluates the elementary symmetric polynomial with the one-coordinate-at-a-
// time recurrence e_j <- e_j + x * e_{j-1}; O(degree * size) exact operations.
u128 eval_elem_sym(int degree, std::span<const u64> coords);
u128 eval_elem_sym(const SymPolyQuery& query);

// Value of e_degree at the all-ones point, C(dim, degree); the smallest
// threshold for which the region {e_degree <= n} contains a lattice point.
u128 min_value(int degree, int dim);

// Elementary symmetric values (c_0, ..., c_degree) of an already-fixed
// coordinate prefix; c_0 = 1. Extending by a value x maps
// c_j -> c_j + x * c_{j-1}, descending in j.
struct PrefixCoefficients {
  int degree = 1;
  std::vector<u128> coeffs;  // size degree + 1, c_0 == 1

  static PrefixCoefficients start(int degree);
  static PrefixCoefficients of(int degree, std::span<const u64> prefix);
  void extend(u128 value);
};

// Largest v >= 1 such that fixing the next coordinate to v and every later
// coordinate to 1 keeps the constraint sum_j c_j * e_{degree-j}(suffix) <= threshold
// satisfiable; 0 if no v works. remaining_dims counts the coordinate being
// bounded plus all later ones. Monotone binary search on v.
u64 next_coord_bound(const PrefixCoefficients& prefix, int remaining_dims, u64 threshold);

}  // namespace hyperlat::sympoly
