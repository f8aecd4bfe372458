#pragma once
#include <cstddef>
#include <omp.h>

namespace speclab {

// Execution policy for the data-parallel sweeps. jobs == 1 selects the serial
// reference path; jobs == 0 lets OpenMP pick; anything else pins the thread
// count. Results must be identical across policies (deterministic merges).
struct Exec {
    int jobs = 0;
    bool serial() const { return jobs == 1; }
};

template <class F>
void parallel_for(std::ptrdiff_t n, const Exec& exec, F&& body) {
    if (exec.serial()) {
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (exec.jobs > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(exec.jobs)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    } else {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    }
}

} // namespace speclab
