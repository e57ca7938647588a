#ifndef RESAVG_FIXTURES_HPP
#define RESAVG_FIXTURES_HPP

// Canonical model inputs shared by the CLI and the test suite: the free
// rotator Hamiltonian and the explicit cosine potential whose generator
// coefficients sit exactly on the non-degeneracy threshold.

#include "series.hpp"

namespace resavg {

// h(y) = |y|^2 / 2
Series quadratic_h(int n);

// f(x) = 2 delta sum over normalized generators |k|_1 <= cutoff of
//        |k|_1^{-n} e^{-|k|_1 s} cos(k.x);
// its Fourier coefficients are f_k = delta |k|_1^{-n} e^{-|k|_1 s} at +-k
Series esempietto_potential(int n, double s, double delta, int cutoff);

}  // namespace resavg

#endif
