#pragma once

#include <cstddef>
#include <vector>

#include "bab/types.hpp"

namespace bab::fft {

std::size_t next_pow2(std::size_t n);

// In-place transforms backed by FFTW; the inverse is unnormalized.
// Safe to call from several threads: plans are cached behind a mutex and executed
// on caller-owned buffers.
void forward(std::vector<cplx>& data);
void inverse(std::vector<cplx>& data);

}  // namespace bab::fft
