#pragma once

// Trial-level parallelism. Every Monte Carlo estimator in the library is a
// loop over independent trials whose results land in a slot indexed by the
// trial number; reductions then run serially in trial order. The serial
// path is the reference the OpenMP path is tested against bit-for-bit.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chameleon {

enum class Exec { serial, openmp };

/// Default policy for library estimators; set from the CLI --jobs flag.
Exec default_exec();
void set_default_exec(Exec e);
/// Sets the OpenMP thread count (no-op without OpenMP). n <= 0 keeps the default.
void set_thread_count(int n);
int thread_count();

/// Calls fn(i) for every i in [0, trials). The first exception thrown by any
/// trial is rethrown on the calling thread after the loop.
template <class Fn>
void for_each_trial(std::size_t trials, Exec exec, Fn&& fn) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < trials; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(trials);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(chameleon_trial_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Runs fn(i) for each trial and collects the results in trial order.
template <class T, class Fn>
std::vector<T> map_trials(std::size_t trials, Exec exec, Fn&& fn) {
  std::vector<T> out(trials);
  for_each_trial(trials, exec, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace chameleon
