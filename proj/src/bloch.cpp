#include "ionsim/bloch.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <complex>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace ionsim {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
constexpr std::complex<double> kI{0.0, 1.0};

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Coherence decay rate of the (lower, upper) pair: half the total
// population decay out of either level plus any explicit dephasing.
double coherence_rate(const LevelScheme& s, int lo, int up) {
    double out_lo = 0.0, out_up = 0.0;
    for (const auto& d : s.decays) {
        if (s.index(d.upper) == lo) out_lo += d.rate;
        if (s.index(d.upper) == up) out_up += d.rate;
    }
    double deph = 0.0;
    for (const auto& d : s.dephasings) {
        const int a = s.index(d.a), b = s.index(d.b);
        if ((a == lo && b == up) || (a == up && b == lo)) deph += d.rate;
    }
    return 0.5 * (out_lo + out_up) + deph;
}

} // namespace

int LevelScheme::index(const std::string& label) const {
    for (size_t i = 0; i < levels.size(); ++i)
        if (levels[i].label == label) return static_cast<int>(i);
    throw std::invalid_argument("LevelScheme: unknown level '" + label + "'");
}

void LevelScheme::validate() const {
    if (levels.empty()) throw std::invalid_argument("LevelScheme: no levels");
    std::set<std::string> seen;
    for (const auto& l : levels)
        if (!seen.insert(l.label).second)
            throw std::invalid_argument("LevelScheme: duplicate level '" + l.label + "'");
    for (const auto& d : decays) {
        index(d.upper);
        index(d.lower);
        if (d.rate < 0.0) throw std::invalid_argument("LevelScheme: negative decay rate");
        if (d.upper == d.lower)
            throw std::invalid_argument("LevelScheme: decay must connect distinct levels");
    }
    for (const auto& c : couplings) {
        index(c.lower);
        index(c.upper);
        if (c.rabi < 0.0) throw std::invalid_argument("LevelScheme: negative Rabi frequency");
    }
    for (const auto& d : dephasings) {
        index(d.a);
        index(d.b);
        if (d.rate < 0.0) throw std::invalid_argument("LevelScheme: negative dephasing rate");
    }
    if (!(epsilon >= 0.0 && epsilon <= 0.5))
        throw std::invalid_argument("LevelScheme: epsilon must be in [0, 0.5]");
}

Eigen::MatrixXcd hamiltonian(const LevelScheme& scheme, double grid_offset) {
    scheme.validate();
    const int n = scheme.dim();

    // Rotating-frame diagonal via BFS over the coupling graph.
    std::vector<double> frame(n, 0.0);
    std::vector<bool> assigned(n, false);
    auto det_of = [&](const Coupling& c) {
        return c.detuning + (c.scan ? grid_offset : 0.0);
    };
    for (int root = 0; root < n; ++root) {
        if (assigned[root]) continue;
        assigned[root] = true;
        frame[root] = scheme.levels[root].zeeman;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (const auto& c : scheme.couplings) {
                const int lo = scheme.index(c.lower), up = scheme.index(c.upper);
                int other = -1;
                double target = 0.0;
                const double step =
                    scheme.levels[up].zeeman - scheme.levels[lo].zeeman - det_of(c);
                if (lo == v) {
                    other = up;
                    target = frame[v] + step;
                } else if (up == v) {
                    other = lo;
                    target = frame[v] - step;
                } else {
                    continue;
                }
                if (!assigned[other]) {
                    assigned[other] = true;
                    frame[other] = target;
                    q.push(other);
                } else if (std::abs(frame[other] - target) > 1e-9) {
                    throw std::invalid_argument(
                        "LevelScheme: inconsistent rotating frame (coupling loop)");
                }
            }
        }
    }

    MatrixXcd h = MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) h(i, i) = frame[i];
    for (const auto& c : scheme.couplings) {
        const int lo = scheme.index(c.lower), up = scheme.index(c.upper);
        h(up, lo) += 0.5 * c.rabi;
        h(lo, up) += 0.5 * c.rabi;
    }
    return h;
}

Eigen::MatrixXcd build_liouvillian(const LevelScheme& scheme, double grid_offset) {
    const MatrixXcd h = hamiltonian(scheme, grid_offset);
    const int n = scheme.dim();
    const MatrixXcd id = MatrixXcd::Identity(n, n);

    MatrixXcd liou = -kI * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& d : scheme.decays) {
        MatrixXcd c = MatrixXcd::Zero(n, n);
        c(scheme.index(d.lower), scheme.index(d.upper)) = std::sqrt(d.rate);
        const MatrixXcd cdc = c.adjoint() * c;
        liou += kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id);
    }
    for (const auto& d : scheme.dephasings) {
        const int a = scheme.index(d.a), b = scheme.index(d.b);
        liou(a + n * b, a + n * b) -= d.rate;
        liou(b + n * a, b + n * a) -= d.rate;
    }
    return liou;
}

DensityMatrix DensityMatrix::checked(Eigen::MatrixXcd raw) {
    if (raw.rows() != raw.cols()) throw std::invalid_argument("DensityMatrix: not square");
    if ((raw - raw.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(raw.trace() - 1.0) > 1e-10)
        throw std::invalid_argument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(raw, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    return DensityMatrix{std::move(raw)};
}

DensityMatrix steady_state(const Eigen::MatrixXcd& liouvillian) {
    const Eigen::Index n2 = liouvillian.rows();
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n2))));
    if (Eigen::Index(n) * n != n2 || liouvillian.cols() != n2)
        throw std::invalid_argument("steady_state: superoperator must be dim^2 x dim^2");

    // Null-space dimension check.
    Eigen::JacobiSVD<MatrixXcd> svd(liouvillian);
    const auto& sv = svd.singularValues();
    const double tol = std::max(1e-10, 1e-12 * sv(0));
    int nullity = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) < tol) ++nullity;
    if (nullity == 0)
        throw DegenerateSteadyStateError("steady_state: no steady state (empty null space)");
    if (nullity > 1)
        throw DegenerateSteadyStateError("steady_state: degenerate null space (" +
                                         std::to_string(nullity) + " steady states)");

    MatrixXcd a = liouvillian;
    a.row(0).setZero();
    for (int k = 0; k < n; ++k) a(0, k + n * k) = 1.0;
    VectorXcd b = VectorXcd::Zero(n2);
    b(0) = 1.0;
    VectorXcd x = a.fullPivLu().solve(b);

    if ((liouvillian * x).cwiseAbs().maxCoeff() > 1e-10)
        throw DegenerateSteadyStateError("steady_state: residual above tolerance");

    MatrixXcd rho = Eigen::Map<MatrixXcd>(x.data(), n, n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    return DensityMatrix::checked(std::move(rho));
}

std::vector<SpectrumPoint> probe_spectrum(const LevelScheme& scheme,
                                          std::span<const double> grid) {
    scheme.validate();
    std::vector<const Coupling*> probes;
    for (const auto& c : scheme.couplings)
        if (c.probe) probes.push_back(&c);
    if (probes.empty() || probes.size() > 2)
        throw std::invalid_argument("probe_spectrum: need one or two probe couplings");

    for (const auto* c : probes) {
        const double gc = coherence_rate(scheme, scheme.index(c->lower), scheme.index(c->upper));
        if (gc <= 0.0) throw std::invalid_argument("probe_spectrum: probe transition has no decay");
        const double sat = c->rabi * c->rabi / (2.0 * gc * gc);
        if (sat > 1e-2)
            throw std::invalid_argument("probe_spectrum: probe not weak (saturation " +
                                        std::to_string(sat) + " > 1e-2)");
    }

    std::vector<SpectrumPoint> out;
    out.reserve(grid.size());
    const double eps = scheme.epsilon;
    for (double x : grid) {
        const DensityMatrix rho = steady_state(build_liouvillian(scheme, x));
        std::vector<std::complex<double>> l(probes.size());
        for (size_t k = 0; k < probes.size(); ++k) {
            const int lo = scheme.index(probes[k]->lower);
            const int up = scheme.index(probes[k]->upper);
            const double gc = coherence_rate(scheme, lo, up);
            l[k] = rho.m(lo, up) * 2.0 * gc / (kI * probes[k]->rabi);
        }
        SpectrumPoint pt{};
        pt.detuning = x;
        if (probes.size() == 1) {
            const std::complex<double> a = 1.0 - 2.0 * eps * l[0];
            pt.transmission = std::norm(a);
            pt.phase = std::arg(a);
        } else {
            // sigma+ / sigma- pair: polarimetric I0 and Faraday angle.
            std::complex<double> lp = l[0], lm = l[1];
            if (probes[0]->polarization == "sigma-") std::swap(lp, lm);
            const std::complex<double> epf = (1.0 - 2.0 * eps * lp);
            const std::complex<double> emf = (1.0 - 2.0 * eps * lm);
            pt.transmission = 0.25 * std::norm(epf + emf);
            pt.phase = 0.5 * std::arg(1.0 - 2.0 * eps * (lp - lm));
        }
        if (pt.transmission < 0.0) pt.transmission = 0.0;
        if (pt.transmission > 1.0) pt.transmission = 1.0;
        out.push_back(pt);
    }
    return out;
}

namespace {

// Zeeman g-factors of the Ba+ manifolds (preset data, standard
// angular-momentum values, not fitted).
constexpr double kGS = 2.0;
constexpr double kGP = 2.0 / 3.0;
constexpr double kGD = 4.0 / 5.0;

// Branching of the P1/2 decay (preset data): 0.73 to S1/2, 0.27 to
// D3/2. Zeeman-resolved weights are squared Clebsch-Gordan ratios:
// J=1/2 -> J=1/2 splits 2/3 (sigma) + 1/3 (pi); J=1/2 -> J=3/2 splits
// 1/2 + 1/3 + 1/6.
constexpr double kBranchS = 0.73;
constexpr double kBranchD = 0.27;

LevelScheme make_two_level(const PresetOptions& o) {
    LevelScheme s;
    s.epsilon = o.epsilon;
    s.levels = {{"g", 0.0}, {"e", 0.0}};
    s.decays = {{"e", "g", 2.0 * o.gamma, "pi"}};
    const double rabi = o.probe_rabi > 0.0 ? o.probe_rabi : 0.01 * o.gamma;
    s.couplings = {{"g", "e", rabi, o.delta_g, "pi", true, true}};
    return s;
}

LevelScheme make_lambda(const PresetOptions& o) {
    LevelScheme s;
    s.epsilon = o.epsilon;
    s.levels = {{"g", 0.0}, {"s", 0.0}, {"e", 0.0}};
    s.decays = {{"e", "g", o.gamma, "sigma-"}, {"e", "s", o.gamma, "sigma+"}};
    const double rabi = o.probe_rabi > 0.0 ? o.probe_rabi : 0.005 * o.gamma;
    // Probe fixed at delta_g; the control detuning carries the scanned
    // two-photon detuning, with Eq.-(10)'s Omega_r being half the
    // control Rabi frequency.
    s.couplings = {{"g", "e", rabi, o.delta_g, "pi", true, false},
                   {"s", "e", 2.0 * o.omega_r, o.delta_g, "pi", false, true}};
    if (o.gamma0 > 0.0) s.dephasings = {{"g", "s", o.gamma0}};
    return s;
}

void add_ba_levels(LevelScheme& s, double zeeman_unit, bool with_d) {
    s.levels = {{"S-", -0.5 * kGS * zeeman_unit},
                {"S+", +0.5 * kGS * zeeman_unit},
                {"P-", -0.5 * kGP * zeeman_unit},
                {"P+", +0.5 * kGP * zeeman_unit}};
    if (with_d)
        for (double m : {-1.5, -0.5, 0.5, 1.5}) {
            std::ostringstream lbl;
            lbl << "D" << (m > 0 ? "+" : "") << m;
            s.levels.push_back({lbl.str(), m * kGD * zeeman_unit});
        }
}

LevelScheme make_ba138(const PresetOptions& o, bool with_d) {
    LevelScheme s;
    s.epsilon = o.epsilon;
    const double gamma_p = 2.0 * o.gamma; // total P1/2 decay rate
    const double unit = 2.0 * o.delta_b / (kGS + kGP);
    add_ba_levels(s, unit, with_d);

    const double s_share = with_d ? kBranchS : 1.0;
    s.decays = {{"P+", "S-", gamma_p * s_share * 2.0 / 3.0, "sigma+"},
                {"P+", "S+", gamma_p * s_share / 3.0, "pi"},
                {"P-", "S+", gamma_p * s_share * 2.0 / 3.0, "sigma-"},
                {"P-", "S-", gamma_p * s_share / 3.0, "pi"}};
    if (with_d) {
        const double gd = gamma_p * kBranchD;
        s.decays.push_back({"P+", "D+1.5", gd * 0.5, "sigma-"});
        s.decays.push_back({"P+", "D+0.5", gd / 3.0, "pi"});
        s.decays.push_back({"P+", "D-0.5", gd / 6.0, "sigma+"});
        s.decays.push_back({"P-", "D-1.5", gd * 0.5, "sigma+"});
        s.decays.push_back({"P-", "D-0.5", gd / 3.0, "pi"});
        s.decays.push_back({"P-", "D+0.5", gd / 6.0, "sigma-"});
    }

    const double rabi = o.probe_rabi > 0.0 ? o.probe_rabi : 0.01 * o.gamma;
    const bool scan_probe = !with_d; // 8-level scans the repumper instead
    s.couplings = {{"S-", "P+", rabi, o.delta_g, "sigma+", true, scan_probe},
                   {"S+", "P-", rabi, o.delta_g, "sigma-", true, scan_probe}};
    if (with_d) {
        const double wr = o.repump_rabi;
        s.couplings.push_back({"D-1.5", "P-", wr * std::sqrt(0.5), o.delta_g, "sigma+", false, true});
        s.couplings.push_back({"D-0.5", "P+", wr * std::sqrt(1.0 / 6.0), o.delta_g, "sigma+", false, true});
        s.couplings.push_back({"D+1.5", "P+", wr * std::sqrt(0.5), o.delta_g, "sigma-", false, true});
        s.couplings.push_back({"D+0.5", "P-", wr * std::sqrt(1.0 / 6.0), o.delta_g, "sigma-", false, true});
    }
    return s;
}

} // namespace

LevelScheme preset_scheme(const std::string& name, const PresetOptions& opt) {
    if (name == "two_level") return make_two_level(opt);
    if (name == "lambda") return make_lambda(opt);
    if (name == "ba138_4level") return make_ba138(opt, false);
    if (name == "ba138_8level") return make_ba138(opt, true);
    throw std::invalid_argument("unknown preset '" + name + "'");
}

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) known = true;
        if (!known)
            throw std::invalid_argument("scheme config: unknown key '" + it.key() + "' in " +
                                        where);
    }
}

} // namespace

LevelScheme scheme_from_json_text(const std::string& text) {
    const json j = json::parse(text);
    reject_unknown(j, {"levels", "decays", "couplings", "dephasings", "epsilon"}, "root");
    LevelScheme s;
    if (!j.contains("levels")) throw std::invalid_argument("scheme config: missing 'levels'");
    for (const auto& l : j.at("levels")) {
        reject_unknown(l, {"label", "zeeman"}, "levels");
        s.levels.push_back({l.at("label").get<std::string>(), l.value("zeeman", 0.0)});
    }
    for (const auto& d : j.value("decays", json::array())) {
        reject_unknown(d, {"upper", "lower", "rate", "polarization"}, "decays");
        s.decays.push_back({d.at("upper").get<std::string>(), d.at("lower").get<std::string>(),
                            d.at("rate").get<double>(), d.value("polarization", "pi")});
    }
    for (const auto& c : j.value("couplings", json::array())) {
        reject_unknown(c, {"lower", "upper", "rabi", "detuning", "polarization", "probe", "scan"},
                       "couplings");
        s.couplings.push_back({c.at("lower").get<std::string>(), c.at("upper").get<std::string>(),
                               c.at("rabi").get<double>(), c.value("detuning", 0.0),
                               c.value("polarization", "pi"), c.value("probe", false),
                               c.value("scan", false)});
    }
    for (const auto& d : j.value("dephasings", json::array())) {
        reject_unknown(d, {"a", "b", "rate"}, "dephasings");
        s.dephasings.push_back({d.at("a").get<std::string>(), d.at("b").get<std::string>(),
                                d.at("rate").get<double>()});
    }
    s.epsilon = j.value("epsilon", 0.04);
    s.validate();
    return s;
}

LevelScheme scheme_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("scheme config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return scheme_from_json_text(ss.str());
}

} // namespace ionsim
