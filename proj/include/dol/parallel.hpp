#pragma once

#include <cstddef>
#include <cstdint>

namespace dol {

/// Selects between the OpenMP kernel and the serial reference loop. Both
/// visit the same indices and write into caller-owned slots, so results are
/// bitwise identical; tests compare the two.
enum class Execution { serial, parallel };

template <class Body>
void for_each_index(std::size_t count, Execution execution, Body&& body) {
  if (execution == Execution::parallel) {
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
      body(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
  }
}

int max_threads();

}  // namespace dol
