#pragma once

#include <vector>

#include "helix/util.hpp"

namespace helix {

// Thin FFTW wrapper for 1-d/2-d complex transforms with cached plans.
// Forward maps grid samples to Fourier-series coefficients (the 1/N
// scaling lives here), backward is the plain synthesis sum, so
// backward(forward(f)) == f to rounding.
void fft_forward(int n1, int n2, cplx* data);
void fft_backward(int n1, int n2, cplx* data);

}  // namespace helix
