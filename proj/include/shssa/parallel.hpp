#pragma once

#include <cstddef>

namespace shssa::parallel {

/// Worker threads the OpenMP kernels may use.
int max_threads();

/// Caps the worker thread count (values < 1 are treated as 1).
void set_max_threads(int n);

/// Applies SHSSA_THREADS from the environment if set. Returns the resulting thread count.
int apply_environment();

/// Loops shorter than this stay serial.
inline constexpr std::size_t min_parallel_length = 1 << 14;

} // namespace shssa::parallel
