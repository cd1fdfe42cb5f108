#pragma once

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

namespace bab {

enum class Exec { Serial, Parallel };

// Runs f(0..n-1) and returns the results in index order. Each replicate must own its
// state (seed derived from the index), so both paths give identical output.
template <class F>
auto replicate(std::size_t n, F&& f, Exec exec = Exec::Parallel) {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out(n);
    if (exec == Exec::Serial) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::exception_ptr err;
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(bab_replicate_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace bab
