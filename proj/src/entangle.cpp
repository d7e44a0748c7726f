#include "ionsim/entangle.hpp"

#include "ionsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ionsim {

namespace {

using Complex = std::complex<double>;
constexpr Complex kI{0.0, 1.0};

enum AtomIdx { kGG = 0, kGE = 1, kEG = 2, kEE = 3 };

void require_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
}

} // namespace

void ProtocolParams::validate() const {
    require_unit(p_e, "p_e");
    require_unit(eta, "eta");
    require_unit(kappa_recoil, "kappa_recoil");
    require_unit(kappa_dephasing, "kappa_dephasing");
    require_unit(readout_fidelity, "readout_fidelity");
    if (dark_rate < 0.0 || duty_cycle < 0.0 || gate < 0.0)
        throw std::invalid_argument("dark_rate, gate and duty_cycle must be >= 0");
    if (phase_jitter_sigma < 0.0)
        throw std::invalid_argument("phase_jitter_sigma must be >= 0");
    if (double_scatter < 0.0)
        throw std::invalid_argument("double_scatter must be >= 0");
    if (dark_rate > 0.0 && gate <= 0.0)
        throw std::invalid_argument("gate must be > 0 when dark_rate > 0");
}

TwoQubitState TwoQubitState::checked(Eigen::Matrix4cd raw) {
    if ((raw - raw.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("TwoQubitState: not Hermitian");
    if (std::abs(raw.trace() - 1.0) > 1e-10)
        throw std::invalid_argument("TwoQubitState: trace != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(raw, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("TwoQubitState: negative eigenvalue");
    return TwoQubitState{raw};
}

AnalyticSinglePhoton analytic_single_photon(double p_e, double eta) {
    require_unit(p_e, "p_e");
    require_unit(eta, "eta");
    return {(1.0 - p_e) / (1.0 - eta * p_e), 2.0 * eta * p_e * (1.0 - eta * p_e)};
}

AnalyticTwoPhoton analytic_two_photon(double eta) {
    require_unit(eta, "eta");
    return {eta * eta, 2.0 * eta * eta};
}

double success_ratio(double eta, double target_fidelity) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("success_ratio: eta must be in (0, 1]");
    if (!(target_fidelity > 0.0 && target_fidelity <= 1.0))
        throw std::invalid_argument("success_ratio: target fidelity must be in (0, 1]");
    const double p_e = (1.0 - target_fidelity) / (1.0 - eta * target_fidelity);
    if (p_e > 1.0)
        throw std::invalid_argument("success_ratio: target fidelity infeasible (p_e > 1)");
    const AnalyticSinglePhoton s = analytic_single_photon(p_e, eta);
    return s.success_probability / (eta * eta);
}

double detection_chain_efficiency(std::span<const double> stages) {
    double eta = 1.0;
    for (double s : stages) {
        require_unit(s, "stage efficiency");
        eta *= s;
    }
    return eta;
}

JointState joint_state(double p_e, const std::array<double, 4>& phases) {
    require_unit(p_e, "p_e");
    const double la = phases[0], lb = phases[1], da = phases[2], db = phases[3];
    JointState js;
    js.p_e = p_e;
    js.amplitudes.setZero();
    // |atoms, photons>: photon index bit layout n_A n_B.
    js.amplitudes(4 * kGG + 0) = (1.0 - p_e) * std::polar(1.0, la + lb);
    js.amplitudes(4 * kEG + 2) = std::sqrt(p_e * (1.0 - p_e)) * std::polar(1.0, la + db);
    js.amplitudes(4 * kGE + 1) = std::sqrt(p_e * (1.0 - p_e)) * std::polar(1.0, lb + da);
    js.amplitudes(4 * kEE + 3) = p_e * std::polar(1.0, da + db);
    return js;
}

HeraldResult herald_project(const JointState& joint, const ProtocolParams& params) {
    params.validate();
    const double eta = params.eta;
    const double p_e = joint.p_e;

    const Complex a_eg = joint.amplitudes(4 * kEG + 2);
    const Complex a_ge = joint.amplitudes(4 * kGE + 1);
    const Complex a_ee = joint.amplitudes(4 * kEE + 3);

    HeraldResult r{};
    r.w_psi = eta * (std::norm(a_eg) + std::norm(a_ge));
    r.w_ee = 2.0 * eta * (1.0 - eta) * std::norm(a_ee);
    r.w_double_scatter = params.double_scatter * 2.0 * eta * p_e * p_e * (1.0 - p_e);
    r.w_dark = -std::expm1(-params.dark_rate * params.gate);

    const double total = r.w_psi + r.w_ee + r.w_double_scatter + r.w_dark;
    if (total <= 0.0)
        throw std::domain_error("herald_project: no herald channel has nonzero weight");
    r.herald_probability = total;

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    if (r.w_psi > 0.0) {
        Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
        const double norm = std::sqrt(std::norm(a_eg) + std::norm(a_ge));
        v(kEG) = a_eg / norm;
        v(kGE) = a_ge / norm;
        Eigen::Matrix4cd psi = v * v.adjoint();
        const double kappa = params.kappa_recoil * params.kappa_dephasing *
                             std::exp(-0.5 * params.phase_jitter_sigma * params.phase_jitter_sigma);
        psi(kEG, kGE) *= kappa;
        psi(kGE, kEG) *= kappa;
        rho += r.w_psi * psi;
    }
    rho(kEE, kEE) += r.w_ee;
    rho(kGG, kGG) += r.w_double_scatter;
    // Dark heralds leave the (traced-over-photons) unconditional mixture.
    rho(kGG, kGG) += r.w_dark * (1.0 - p_e) * (1.0 - p_e);
    rho(kGE, kGE) += r.w_dark * p_e * (1.0 - p_e);
    rho(kEG, kEG) += r.w_dark * p_e * (1.0 - p_e);
    rho(kEE, kEE) += r.w_dark * p_e * p_e;

    rho /= total;
    r.state = TwoQubitState::checked(rho);
    return r;
}

HeraldCalibration calibrate_herald_model(double p_e, double eta, double dark_rate,
                                         double psi_fraction, double dark_fraction) {
    if (!(psi_fraction > 0.0 && psi_fraction + dark_fraction < 1.0))
        throw std::invalid_argument("calibrate_herald_model: infeasible target fractions");
    if (!(dark_rate > 0.0))
        throw std::invalid_argument("calibrate_herald_model: dark_rate must be > 0");
    const double w_psi = 2.0 * eta * p_e * (1.0 - p_e);
    const double w_ee = 2.0 * eta * (1.0 - eta) * p_e * p_e;
    const double total = w_psi / psi_fraction;
    const double w_dark = dark_fraction * total;
    const double w_ds = total - w_psi - w_ee - w_dark;
    if (w_ds < 0.0)
        throw std::invalid_argument("calibrate_herald_model: target fractions infeasible");
    HeraldCalibration c{};
    c.gate = -std::log1p(-w_dark) / dark_rate;
    c.double_scatter = w_ds / (2.0 * eta * p_e * p_e * (1.0 - p_e));
    return c;
}

Eigen::Matrix4cd rotation_matrix(const RotationPulse& pulse) {
    if (pulse.theta < 0.0)
        throw std::invalid_argument("RotationPulse: theta must be >= 0");
    Eigen::Matrix2cd axis;
    axis << 0.0, std::polar(1.0, -pulse.phi), std::polar(1.0, pulse.phi), 0.0;
    const Eigen::Matrix2cd u = std::cos(0.5 * pulse.theta) * Eigen::Matrix2cd::Identity() -
                               kI * std::sin(0.5 * pulse.theta) * axis;
    Eigen::Matrix4cd r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r.block<2, 2>(2 * i, 2 * j) = u(i, j) * u;
    return r;
}

TwoQubitState rotate(const TwoQubitState& state, const RotationPulse& pulse) {
    const Eigen::Matrix4cd r = rotation_matrix(pulse);
    return TwoQubitState::checked(r * state.rho * r.adjoint());
}

double parity(const TwoQubitState& state) {
    return (state.rho(kGG, kGG) + state.rho(kEE, kEE) - state.rho(kGE, kGE) -
            state.rho(kEG, kEG))
        .real();
}

ParityScan parity_scan(const TwoQubitState& state, bool double_pulse,
                       std::span<const double> phi_grid) {
    if (phi_grid.empty()) throw std::invalid_argument("parity_scan: empty phase grid");
    const Eigen::Matrix4cd pre =
        double_pulse ? rotation_matrix({std::numbers::pi / 2.0, std::numbers::pi / 2.0})
                     : Eigen::Matrix4cd::Identity();
    ParityScan out;
    out.phi.assign(phi_grid.begin(), phi_grid.end());
    out.value.reserve(phi_grid.size());
    for (double phi : phi_grid) {
        const Eigen::Matrix4cd r = rotation_matrix({std::numbers::pi / 2.0, phi}) * pre;
        const Eigen::Matrix4cd rho = r * state.rho * r.adjoint();
        out.value.push_back((rho(kGG, kGG) + rho(kEE, kEE) - rho(kGE, kGE) - rho(kEG, kEG)).real());
    }
    const auto [mn, mx] = std::minmax_element(out.value.begin(), out.value.end());
    out.contrast = 0.5 * (*mx - *mn);
    out.offset = 0.5 * (*mx + *mn);
    return out;
}

double fidelity(const TwoQubitState& state) {
    const double f =
        0.5 * (state.rho(kGE, kGE).real() + state.rho(kEG, kEG).real()) +
        state.rho(kEG, kGE).real();
    return f < 0.0 ? 0.0 : (f > 1.0 ? 1.0 : f);
}

namespace {

enum class Channel { kNone, kPsi, kEe, kDoubleScatter, kDark };
enum Category { kCatGG = 0, kCatSingle = 1, kCatEE = 2 };

int sample_category(SplitMix64& rng, const std::array<double, 3>& probs) {
    const double u = rng.uniform();
    if (u < probs[0]) return 0;
    if (u < probs[0] + probs[1]) return 1;
    return 2;
}

} // namespace

McStats monte_carlo(const ProtocolParams& params, const McOptions& opt) {
    params.validate();
    if (opt.n_trials < 1) throw std::invalid_argument("monte_carlo: n_trials must be >= 1");

    const double p_dark = -std::expm1(-params.dark_rate * params.gate);
    const double p_ds = params.double_scatter * params.p_e * params.p_e;
    const double kappa = params.kappa_recoil * params.kappa_dephasing;
    const double state_phi = (params.phases[1] - params.phases[0]) +
                             (params.phases[2] - params.phases[3]);

    const size_t n_phi = opt.parity_phis.size();
    std::vector<double> psum(n_phi, 0.0);
    std::vector<std::uint64_t> pn(n_phi, 0);

    McStats stats;
    stats.n_trials = opt.n_trials;

    const Eigen::Matrix4cd pre =
        opt.double_pulse ? rotation_matrix({std::numbers::pi / 2.0, std::numbers::pi / 2.0})
                         : Eigen::Matrix4cd::Identity();
    std::vector<Eigen::Matrix4cd> rot_cache;
    rot_cache.reserve(n_phi);
    for (double phi : opt.parity_phis)
        rot_cache.push_back(rotation_matrix({std::numbers::pi / 2.0, phi}) * pre);

    for (std::uint64_t trial = 0; trial < opt.n_trials; ++trial) {
        SplitMix64 rng = SplitMix64::stream(opt.seed, trial);
        const bool xa = rng.uniform() < params.p_e;
        const bool xb = rng.uniform() < params.p_e;

        Channel ch = Channel::kNone;
        if (xa && xb) {
            const int clicks = (rng.uniform() < params.eta ? 1 : 0) +
                               (rng.uniform() < params.eta ? 1 : 0);
            if (clicks == 1) ch = Channel::kEe;
        } else if (xa || xb) {
            if (rng.uniform() < params.eta) ch = Channel::kPsi;
        }
        if (ch == Channel::kNone && p_ds > 0.0) {
            const bool dsa = !xb && rng.uniform() < p_ds && rng.uniform() < params.eta;
            const bool dsb = !dsa && !xa && rng.uniform() < p_ds && rng.uniform() < params.eta;
            if (dsa || dsb) ch = Channel::kDoubleScatter;
        }
        if (ch == Channel::kNone && p_dark > 0.0 && rng.uniform() < p_dark)
            ch = Channel::kDark;
        if (ch == Channel::kNone) continue;

        ++stats.n_heralds;

        int true_cat;
        switch (ch) {
            case Channel::kPsi: true_cat = kCatSingle; break;
            case Channel::kEe: true_cat = kCatEE; break;
            case Channel::kDoubleScatter: true_cat = kCatGG; break;
            default: true_cat = (xa && xb) ? kCatEE : ((xa || xb) ? kCatSingle : kCatGG); break;
        }

        int measured = true_cat;
        if (rng.uniform() >= params.readout_fidelity)
            measured = (true_cat + 1 + (rng.uniform() < 0.5 ? 0 : 1)) % 3;
        ++stats.counts[measured];

        if (n_phi == 0) continue;

        // Parity sample at a round-robin phase setting.
        const size_t k = static_cast<size_t>((stats.n_heralds - 1) % n_phi);
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        switch (ch) {
            case Channel::kPsi: {
                double phi = state_phi;
                if (params.phase_jitter_sigma > 0.0)
                    phi += params.phase_jitter_sigma * rng.gaussian();
                rho(kEG, kEG) = 0.5;
                rho(kGE, kGE) = 0.5;
                rho(kEG, kGE) = 0.5 * kappa * std::polar(1.0, -phi);
                rho(kGE, kEG) = std::conj(rho(kEG, kGE));
                break;
            }
            case Channel::kEe: rho(kEE, kEE) = 1.0; break;
            case Channel::kDoubleScatter: rho(kGG, kGG) = 1.0; break;
            default: {
                const int a = xa ? 1 : 0, b = xb ? 1 : 0;
                rho(2 * a + b, 2 * a + b) = 1.0;
                break;
            }
        }
        const Eigen::Matrix4cd rr = rot_cache[k] * rho * rot_cache[k].adjoint();
        std::array<double, 3> probs{rr(kGG, kGG).real(),
                                    rr(kGE, kGE).real() + rr(kEG, kEG).real(),
                                    rr(kEE, kEE).real()};
        int cat = sample_category(rng, probs);
        if (rng.uniform() >= params.readout_fidelity)
            cat = (cat + 1 + (rng.uniform() < 0.5 ? 0 : 1)) % 3;
        psum[k] += (cat == kCatSingle) ? -1.0 : 1.0;
        pn[k] += 1;
    }

    if (stats.n_heralds > 0)
        for (int c = 0; c < 3; ++c)
            stats.fractions[c] =
                static_cast<double>(stats.counts[c]) / static_cast<double>(stats.n_heralds);
    stats.herald_rate_per_min = static_cast<double>(stats.n_heralds) /
                                static_cast<double>(stats.n_trials) * params.duty_cycle * 60.0;

    for (size_t k = 0; k < n_phi; ++k) {
        McParityPoint pt{};
        pt.phi = opt.parity_phis[k];
        pt.n = pn[k];
        if (pn[k] > 0) {
            pt.mean = psum[k] / static_cast<double>(pn[k]);
            // binomial error of a +/-1 outcome
            const double var = std::max(0.0, 1.0 - pt.mean * pt.mean);
            pt.std_error = std::sqrt(var / static_cast<double>(pn[k]));
        }
        stats.parity.push_back(pt);
    }
    return stats;
}

} // namespace ionsim
