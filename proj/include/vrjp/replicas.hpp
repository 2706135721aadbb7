#pragma once

#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vrjp/rng.hpp"

namespace vrjp {

/// Number of OpenMP threads to use for `workers` (0 = runtime default).
inline int resolve_workers(int workers) {
#ifdef _OPENMP
  return workers > 0 ? workers : omp_get_max_threads();
#else
  (void)workers;
  return 1;
#endif
}

/// Serial reference: out[r] = fn(rng_r, r) with rng_r seeded by
/// derive_seed(master_seed, r).
template <class Result, class Fn>
std::vector<Result> map_replicas_serial(std::size_t count, std::uint64_t master_seed, Fn&& fn) {
  std::vector<Result> out(count);
  for (std::size_t r = 0; r < count; ++r) {
    Rng rng(derive_seed(master_seed, r));
    out[r] = fn(rng, r);
  }
  return out;
}

/// OpenMP version of map_replicas_serial. Each replica owns its stream and
/// output slot, so the result is bit-identical to the serial reference for
/// any worker count. `fn` must be safe to call concurrently.
template <class Result, class Fn>
std::vector<Result> map_replicas(std::size_t count, std::uint64_t master_seed, int workers, Fn&& fn) {
  std::vector<Result> out(count);
  std::exception_ptr failure;
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 16) num_threads(resolve_workers(workers))
  for (long long r = 0; r < n; ++r) {
    try {
      Rng rng(derive_seed(master_seed, static_cast<std::uint64_t>(r)));
      out[static_cast<std::size_t>(r)] = fn(rng, static_cast<std::size_t>(r));
    } catch (...) {
#pragma omp critical(vrjp_replica_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace vrjp
