#pragma once

namespace geowarp {

/// Selects between the serial reference kernels and the OpenMP row-parallel
/// kernels. Both produce the same values; the parallel reductions sum per-row
/// partials in row order so results do not depend on the thread count.
enum class Exec { Serial, Parallel };

/// Applies the GEOWARP_THREADS cap (if set) to the OpenMP runtime and returns
/// the number of threads parallel kernels will use.
int configure_threads();

int max_threads();

/// Sets the OpenMP thread count directly (tests and benchmarks).
void set_threads(int n);

}  // namespace geowarp
