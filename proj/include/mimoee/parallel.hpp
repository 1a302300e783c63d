#pragma once

// Index-parallel loops over independent samples/trials. Each iteration writes
// only its own output slot, and reductions happen afterwards in index order,
// so the serial and OpenMP paths produce bit-identical results.

#include <cstddef>
#include <exception>
#include <vector>

namespace mimoee {

enum class Exec { serial, parallel };

int max_threads();

/// Calls body(i) for i in [0, n). Exceptions thrown by any iteration are
/// rethrown after the loop (lowest index first).
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// out[i] = fn(i), computed with for_each_index.
template <typename T, typename Fn>
std::vector<T> map_indices(std::size_t n, Exec exec, Fn&& fn) {
  std::vector<T> out(n);
  for_each_index(n, exec, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace mimoee
