#include "schouten/schedule.hpp"

#include "schouten/errors.hpp"

#include <string>

namespace schouten {

namespace {

void check_t(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ArgumentError("homotopy parameter t=" + std::to_string(t) + " outside [0,1]");
}

}  // namespace

double PsiSchedule::operator()(double t) const {
    check_t(t);
    if (t >= ramp_end) return 1.0;
    const double s = t / ramp_end;
    return s * s * (3.0 - 2.0 * s);
}

double PsiSchedule::derivative(double t) const {
    check_t(t);
    if (t >= ramp_end) return 0.0;
    const double s = t / ramp_end;
    return 6.0 * s * (1.0 - s) / ramp_end;
}

double psi(double t) { return PsiSchedule{}(t); }
double psi_prime(double t) { return PsiSchedule{}.derivative(t); }

}  // namespace schouten
