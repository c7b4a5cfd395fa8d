#pragma once

#include <cstddef>
#include <span>

namespace medshift {

/// Threads OpenMP regions will use (1 when built without OpenMP).
int max_threads();
/// Sets the OpenMP thread count; n <= 0 restores the default.
void set_threads(int n);

/// Fixed-order pairwise summation. The result depends only on the values
/// and their order, never on how they were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace medshift
