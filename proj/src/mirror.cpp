#include "ionsim/mirror.hpp"

#include <cmath>
#include <numbers>

namespace ionsim {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

double round_trip_phase(const CavityParams& p, double position) {
    p.validate();
    if (!std::isfinite(position))
        throw std::invalid_argument("round_trip_phase: position must be finite");
    const double half = 0.5 * p.wavelength;
    // phi = 2 k R = 2*pi * (R mod lambda/2) / (lambda/2)
    const double frac = position - half * std::floor(position / half);
    return 2.0 * std::numbers::pi * frac / half;
}

double fp_transmission_phi(double epsilon, double r, double phi) {
    const double t2 = 1.0 - r * r;
    const std::complex<double> den = 1.0 - 2.0 * r * epsilon * std::exp(kI * phi);
    const double t = t2 * (1.0 - 2.0 * epsilon) * (1.0 - 2.0 * epsilon) / std::norm(den);
    return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
}

double fp_transmission(const CavityParams& p) {
    p.validate();
    return fp_transmission_phi(p.epsilon, p.r, round_trip_phase(p, p.atom_mirror_distance));
}

std::complex<double> qed_coupling_ratio(double epsilon, double r, double phi) {
    const std::complex<double> e = std::exp(kI * phi);
    return epsilon * (1.0 - r * e) / (1.0 - 2.0 * r * epsilon * e);
}

double qed_transmission_phi(double epsilon, double r, double phi) {
    const double t2 = 1.0 - r * r;
    const double t = t2 * std::norm(1.0 - 2.0 * qed_coupling_ratio(epsilon, r, phi));
    return t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
}

double qed_transmission(const CavityParams& p) {
    p.validate();
    return qed_transmission_phi(p.epsilon, p.r, round_trip_phase(p, p.atom_mirror_distance));
}

double finesse(const CavityParams& p) {
    p.validate();
    const double x = 2.0 * p.epsilon * p.r;
    return std::numbers::pi * x / (1.0 - x * x);
}

std::vector<FringePoint> fringe_scan(const CavityParams& p,
                                     const std::vector<double>& positions,
                                     double reflection_amplitude) {
    p.validate();
    for (double x : positions)
        if (!std::isfinite(x))
            throw std::invalid_argument("fringe_scan: positions must be finite");

    const double tmax = fp_transmission_phi(p.epsilon, p.r, 0.0);
    const double tmin = fp_transmission_phi(p.epsilon, p.r, std::numbers::pi);
    const double span = tmax - tmin;

    std::vector<FringePoint> out;
    out.reserve(positions.size());
    for (double x : positions) {
        const double t = fp_transmission_phi(p.epsilon, p.r, round_trip_phase(p, x));
        const double norm = span > 0.0 ? (t - tmin) / span : 0.0;
        out.push_back({x, t, reflection_amplitude * (1.0 - norm)});
    }
    return out;
}

} // namespace ionsim
