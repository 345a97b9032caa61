#pragma once

namespace schouten {

/// Homotopy weight psi on [0,1]: C^1 ramp from psi(0) = 0 to psi = 1 on [1/2, 1].
/// The ramp is the cubic smoothstep s^2 (3 - 2 s) with s = t / ramp_end.
struct PsiSchedule {
    double ramp_end = 0.5;

    double operator()(double t) const;
    double derivative(double t) const;
};

double psi(double t);
double psi_prime(double t);

}  // namespace schouten
