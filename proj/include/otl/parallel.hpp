#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace otl {

/// Worker count used by element loops. 0 selects hardware concurrency.
void set_num_threads(int n);
int num_threads();

/// Element loops are cut into fixed-size chunks whose boundaries do not
/// depend on the thread count, so any reduction done per chunk and then
/// summed in chunk order is bit-identical for every thread setting.
inline constexpr std::size_t kChunkSize = 2048;

/// Calls body(begin, end, chunk_index) for every chunk of [0, n).
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Deterministic sum of term(i) over [0, n).
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term);

} // namespace otl
