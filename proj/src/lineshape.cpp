#include "ionsim/lineshape.hpp"

#include <cmath>
#include <numbers>

namespace ionsim {

namespace {
constexpr Complex kI{0.0, 1.0};
constexpr double kInvSqrt2 = 0.70710678118654752440;
} // namespace

Complex lorentzian(double delta, const TwoLevelParams& p) {
    p.validate();
    return p.gamma / Complex(p.gamma, delta - p.delta0);
}

double transmission(double delta, const TwoLevelParams& p) {
    const double t = std::norm(1.0 - 2.0 * p.epsilon * lorentzian(delta, p));
    return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
}

double phase_shift(double delta, const TwoLevelParams& p) {
    return std::arg(1.0 - 2.0 * p.epsilon * lorentzian(delta, p));
}

std::pair<Complex, Complex> doublet_outputs(double delta, const ZeemanDoubletParams& p) {
    p.validate();
    const double g = p.base.gamma;
    const double d = delta - p.base.delta0;
    const Complex lp = p.rho_plus * g / Complex(g, d - p.delta_b);
    const Complex lm = p.rho_minus * g / Complex(g, d + p.delta_b);
    const double eps = p.base.epsilon;
    return {(1.0 - 2.0 * eps * lp) * kInvSqrt2, (1.0 - 2.0 * eps * lm) * kInvSqrt2};
}

StokesSample polarimetry(double delta, const ZeemanDoubletParams& p) {
    const auto [ep, em] = doublet_outputs(delta, p);
    // Analyzer at -45 degrees carries the conjugate phases so that the
    // Stokes estimator reproduces the sign of the exact rotation angle
    // with the sigma- line placed at delta0 - delta_b.
    const Complex ph = std::polar(1.0, -std::numbers::pi / 4.0);
    StokesSample s{};
    s.i0 = 0.5 * std::norm(ep + em);
    s.i45 = 0.5 * std::norm(ep * ph + em * std::conj(ph));
    s.i90 = 0.5 * std::norm(ep - em);
    s.s0 = s.i0 + s.i90;
    s.s1 = s.i0 - s.i90;
    s.s2 = 2.0 * s.i45 - s.s0;
    return s;
}

FaradayAngle faraday_angle(double delta, const ZeemanDoubletParams& p) {
    p.validate();
    const double g = p.base.gamma;
    const double d = delta - p.base.delta0;
    const Complex lp = p.rho_plus * g / Complex(g, d - p.delta_b);
    const Complex lm = p.rho_minus * g / Complex(g, d + p.delta_b);
    FaradayAngle a{};
    a.exact = 0.5 * std::arg(1.0 - 2.0 * p.base.epsilon * (lp - lm));
    const StokesSample s = polarimetry(delta, p);
    a.estimator = 0.5 * std::atan((2.0 * s.i45 - s.i0) / s.i0);
    return a;
}

Complex eit_susceptibility(double delta_two_photon, const LambdaParams& p) {
    p.validate();
    const Complex gd(p.gamma0, -delta_two_photon);
    return p.gamma * gd / (gd * Complex(p.gamma, p.delta_g) + p.omega_r * p.omega_r);
}

} // namespace ionsim
