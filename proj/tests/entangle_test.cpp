#include "doctest.h"

#include "ionsim/entangle.hpp"
#include "ionsim/rng.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace ionsim;

namespace {
constexpr double kPi = 3.14159265358979323846;
using Complex = std::complex<double>;

TwoQubitState random_state(std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::Matrix4cd a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = Complex(nd(gen), nd(gen));
  Eigen::Matrix4cd rho = a * a.adjoint();
  rho /= rho.trace().real();
  return TwoQubitState::checked(rho);
}

TwoQubitState pure_state(const Eigen::Vector4cd& psi) {
  Eigen::Matrix4cd rho = psi * psi.adjoint();
  rho /= rho.trace().real();
  return TwoQubitState::checked(rho);
}

Eigen::Vector4cd psi_plus() {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v(1) = 1.0 / std::sqrt(2.0); // |ge>
  v(2) = 1.0 / std::sqrt(2.0); // |eg>
  return v;
}

} // namespace

TEST_CASE("analytic single-photon fidelity and success probability") {
  // F1 = (1 - p_e)/(1 - eta p_e) with p_e = 0.07, eta = 8e-4.
  const auto b = analytic_single_photon(0.07, 8e-4);
  CHECK(b.fidelity == doctest::Approx(0.9300520829166432).epsilon(1e-12));
  CHECK(b.success_probability == doctest::Approx(0.000111993728).epsilon(1e-12));

  // Perfect detection of a vanishing excitation is noiseless.
  CHECK(analytic_single_photon(0.0, 1.0).fidelity == doctest::Approx(1.0));
}

TEST_CASE("two-photon success probability conventions") {
  const auto t = analytic_two_photon(8e-4);
  CHECK(t.eta_squared == doctest::Approx(6.4e-7).epsilon(1e-12));
  CHECK(t.two_eta_squared == doctest::Approx(1.28e-6).epsilon(1e-12));
}

TEST_CASE("single- to two-photon success ratio") {
  // Low efficiency favors the single-photon scheme dramatically.
  CHECK(success_ratio(1e-3, 0.9) ==
        doctest::Approx(200.16012609727292).epsilon(1e-12));
  CHECK(success_ratio(0.9, 0.99) < success_ratio(1e-3, 0.99));
  CHECK_THROWS_AS(success_ratio(0.0, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(success_ratio(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("detection chain efficiency") {
  const double stages[] = {0.04, 0.1, 0.6, 0.5, 0.66};
  const double eta = detection_chain_efficiency(stages);
  CHECK(eta == doctest::Approx(7.92e-4).epsilon(1e-12));
  CHECK(detection_chain_efficiency(std::vector<double>{}) == doctest::Approx(1.0));
  const double zeroed[] = {0.04, 0.0, 0.6};
  CHECK(detection_chain_efficiency(zeroed) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("joint atom-photon state amplitudes") {
  const double p_e = 0.07;
  const std::array<double, 4> phases{0.3, -0.2, 0.15, 0.4};
  const auto js = joint_state(p_e, phases);

  CHECK(js.amplitudes.norm() == doctest::Approx(1.0).epsilon(1e-12));

  // |gg,00>: both atoms stay down, no photons; carries both laser phases.
  const Complex gg00 = (1.0 - p_e) * std::exp(Complex(0.0, phases[0] + phases[1]));
  CHECK(std::abs(js.amplitudes(0) - gg00) < 1e-12);

  // |eg,10>: atom A excited, its photon in mode carrying exp(i(phiLA + phiDB)).
  const double amp = std::sqrt(p_e * (1.0 - p_e));
  const Complex expected = amp * std::exp(Complex(0.0, phases[0] + phases[3]));
  CHECK(std::abs(js.amplitudes(4 * 2 + 2) - expected) < 1e-12);
  CHECK(std::abs(std::abs(js.amplitudes(4 * 2 + 2)) - 0.2551470164434615) < 1e-12);

  // |ee,11>: both excited.
  CHECK(std::abs(std::abs(js.amplitudes(4 * 3 + 3)) - p_e) < 1e-12);
}

TEST_CASE("herald projection limits") {
  SUBCASE("ideal limit gives a unit-fidelity Bell state") {
    ProtocolParams p;
    p.p_e = 1e-6;
    p.eta = 1.0;
    p.dark_rate = 0.0;
    p.double_scatter = 0.0;
    p.kappa_recoil = 1.0;
    p.kappa_dephasing = 1.0;
    p.phase_jitter_sigma = 0.0;
    const auto res = herald_project(joint_state(p.p_e, p.phases), p);
    CHECK(fidelity(res.state) == doctest::Approx(1.0).epsilon(1e-5));
  }

  SUBCASE("fidelity matches the analytic formula exactly") {
    // With unit coherence factors and no spurious channels the herald
    // mixture is Psi vs double excitation, so F = F1.
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 25; ++k) {
      ProtocolParams p;
      p.p_e = 0.3 * u(gen) + 1e-4;
      p.eta = u(gen) * 0.99 + 1e-3;
      p.dark_rate = 0.0;
      p.double_scatter = 0.0;
      p.kappa_recoil = 1.0;
      p.kappa_dephasing = 1.0;
      p.phase_jitter_sigma = 0.0;
      const auto res = herald_project(joint_state(p.p_e, p.phases), p);
      const double f1 = analytic_single_photon(p.p_e, p.eta).fidelity;
      CHECK(fidelity(res.state) == doctest::Approx(f1).epsilon(1e-9));
      CHECK(res.herald_probability ==
            doctest::Approx(2.0 * p.eta * p.p_e * (1.0 - p.eta * p.p_e))
                .epsilon(1e-9));
    }
  }

  SUBCASE("dark counts dilute the herald with an unconditional mixture") {
    ProtocolParams p;
    p.dark_rate = 50.0;
    p.gate = 1e-5;
    const auto no_dark_p = [&] {
      ProtocolParams q = p;
      q.dark_rate = 0.0;
      return herald_project(joint_state(q.p_e, q.phases), q);
    }();
    const auto with_dark = herald_project(joint_state(p.p_e, p.phases), p);
    CHECK(with_dark.w_dark > 0.0);
    CHECK(with_dark.herald_probability > no_dark_p.herald_probability);
    CHECK(fidelity(with_dark.state) < fidelity(no_dark_p.state));
  }

  SUBCASE("herald probability grows with eta and with the dark exposure") {
    ProtocolParams p;
    double prev = 0.0;
    for (const double eta : {1e-4, 1e-3, 1e-2, 0.1}) {
      p.eta = eta;
      const auto res = herald_project(joint_state(p.p_e, p.phases), p);
      CHECK(res.herald_probability > prev);
      prev = res.herald_probability;
    }
  }
}

TEST_CASE("herald model calibration hits the target decomposition") {
  const double p_e = 0.07;
  const double eta = 8e-4;
  const double dark_rate = 10.0;
  const auto cal = calibrate_herald_model(p_e, eta, dark_rate, 0.89, 0.02);

  ProtocolParams p;
  p.p_e = p_e;
  p.eta = eta;
  p.dark_rate = dark_rate;
  p.gate = cal.gate;
  p.double_scatter = cal.double_scatter;
  const auto res = herald_project(joint_state(p_e, p.phases), p);
  const double total = res.w_psi + res.w_ee + res.w_double_scatter + res.w_dark;
  CHECK(res.w_psi / total == doctest::Approx(0.89).epsilon(1e-9));
  CHECK(res.w_dark / total == doctest::Approx(0.02).epsilon(1e-9));
}

TEST_CASE("collective rotations") {
  SUBCASE("zero area is the identity") {
    std::mt19937_64 gen(11);
    const auto rho = random_state(gen);
    const auto rot = rotate(rho, RotationPulse{0.0, 1.234});
    CHECK((rot.rho - rho.rho).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("full turn is the identity channel") {
    std::mt19937_64 gen(13);
    const auto rho = random_state(gen);
    const auto rot = rotate(rho, RotationPulse{2.0 * kPi, 0.7});
    CHECK((rot.rho - rho.rho).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("pi/2 pulse maps the triplet Bell state onto gg/ee coherence") {
    const auto psi = pure_state(psi_plus());
    const auto rot = rotate(psi, RotationPulse{kPi / 2.0, kPi / 2.0});
    // R(pi/2, pi/2) |Psi+> = (|gg> - |ee>)/sqrt(2).
    Eigen::Vector4cd target = Eigen::Vector4cd::Zero();
    target(0) = 1.0 / std::sqrt(2.0);
    target(3) = -1.0 / std::sqrt(2.0);
    const auto ref = pure_state(target);
    CHECK((rot.rho - ref.rho).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("rotations preserve density-matrix structure") {
    std::mt19937_64 gen(17);
    for (int k = 0; k < 20; ++k) {
      const auto rho = random_state(gen);
      const RotationPulse pulse{3.0 * kPi * k / 20.0, 0.37 * k};
      CHECK_NOTHROW(rotate(rho, pulse));
      const auto rot = rotate(rho, pulse);
      CHECK(std::abs(rot.rho.trace().real() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("parity operator") {
  CHECK(parity(pure_state(psi_plus())) == doctest::Approx(-1.0).epsilon(1e-12));

  Eigen::Vector4cd gg = Eigen::Vector4cd::Zero();
  gg(0) = 1.0;
  CHECK(parity(pure_state(gg)) == doctest::Approx(1.0).epsilon(1e-12));

  const TwoQubitState mixed =
      TwoQubitState::checked(Eigen::Matrix4cd::Identity() * 0.25);
  CHECK(parity(mixed) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("single-pulse parity of a Bell state is phase invariant") {
  // R(pi/2, phi)|Psi+> is a gg/ee superposition for every phi, so the
  // single-pulse parity trace is identically +1.
  const auto psi = pure_state(psi_plus());
  std::vector<double> grid(16);
  for (int i = 0; i < 16; ++i) grid[i] = 2.0 * kPi * i / 16.0;
  const auto scan = parity_scan(psi, /*double_pulse=*/false, grid);
  for (const double v : scan.value)
    CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(scan.contrast == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("double-pulse parity oscillation") {
  // Mix a Psi+ component with a gg/ee coherence so both terms of
  // <P>_{phi->0} = 2 Re(rho_ge,eg - rho_gg,ee) are exercised.
  Eigen::Vector4cd a = psi_plus();
  Eigen::Vector4cd b = Eigen::Vector4cd::Zero();
  b(0) = std::sqrt(0.5);
  b(3) = std::sqrt(0.5) * std::exp(Complex(0.0, 0.4));
  Eigen::Matrix4cd rho = 0.7 * (a * a.adjoint()) + 0.3 * (b * b.adjoint());
  const auto state = TwoQubitState::checked(rho);

  std::vector<double> grid(721);
  for (int i = 0; i < 721; ++i) grid[i] = -kPi + 2.0 * kPi * i / 720.0;
  const auto scan = parity_scan(state, /*double_pulse=*/true, grid);

  SUBCASE("phi -> 0 limit") {
    const double expected =
        2.0 * (state.rho(1, 2).real() - state.rho(0, 3).real());
    // grid[360] is phi = 0.
    CHECK(scan.value[360] == doctest::Approx(expected).epsilon(1e-10));
  }

  SUBCASE("period is pi") {
    for (int i = 0; i + 360 < 721; ++i)
      CHECK(scan.value[i] ==
            doctest::Approx(scan.value[i + 360]).scale(1.0).epsilon(1e-10));
  }

  SUBCASE("contrast and offset bracket the trace") {
    double lo = scan.value[0], hi = scan.value[0];
    for (const double v : scan.value) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(scan.contrast == doctest::Approx((hi - lo) / 2.0).epsilon(1e-12));
    CHECK(scan.offset == doctest::Approx((hi + lo) / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("fidelity") {
  CHECK(fidelity(pure_state(psi_plus())) == doctest::Approx(1.0).epsilon(1e-12));

  const TwoQubitState mixed =
      TwoQubitState::checked(Eigen::Matrix4cd::Identity() * 0.25);
  CHECK(fidelity(mixed) == doctest::Approx(0.25).epsilon(1e-12));

  // Agreement with the direct overlap <Psi+|rho|Psi+>.
  std::mt19937_64 gen(23);
  const Eigen::Vector4cd psi = psi_plus();
  for (int k = 0; k < 100; ++k) {
    const auto rho = random_state(gen);
    const double direct = (psi.adjoint() * rho.rho * psi)(0).real();
    CHECK(fidelity(rho) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("counter-based rng streams") {
  SplitMix64 a = SplitMix64::stream(42, 7);
  SplitMix64 b = SplitMix64::stream(42, 7);
  SplitMix64 c = SplitMix64::stream(42, 8);
  bool differ = false;
  for (int i = 0; i < 16; ++i) {
    const double ua = a.uniform();
    CHECK(ua == b.uniform());
    CHECK(ua >= 0.0);
    CHECK(ua < 1.0);
    if (ua != c.uniform()) differ = true;
  }
  CHECK(differ);
}

TEST_CASE("monte carlo engine") {
  ProtocolParams p; // defaults: calibrated herald decomposition

  SUBCASE("bit-exact reproducibility for a fixed seed") {
    McOptions opt;
    opt.n_trials = 20000;
    opt.seed = 9001;
    opt.parity_phis = {0.0, kPi / 4.0, kPi / 2.0};
    const auto s1 = monte_carlo(p, opt);
    const auto s2 = monte_carlo(p, opt);
    CHECK(s1.n_heralds == s2.n_heralds);
    CHECK(s1.counts == s2.counts);
    REQUIRE(s1.parity.size() == s2.parity.size());
    for (size_t i = 0; i < s1.parity.size(); ++i) {
      CHECK(s1.parity[i].mean == s2.parity[i].mean);
      CHECK(s1.parity[i].n == s2.parity[i].n);
    }
  }

  SUBCASE("no detection means no heralds") {
    ProtocolParams q = p;
    q.eta = 0.0;
    q.dark_rate = 0.0;
    McOptions opt;
    opt.n_trials = 5000;
    const auto s = monte_carlo(q, opt);
    CHECK(s.n_heralds == 0);
  }

  SUBCASE("herald rate and populations converge to the analytic model") {
    McOptions opt;
    opt.n_trials = 4000000;
    opt.seed = 2718;
    const auto s = monte_carlo(p, opt);

    const auto res = herald_project(joint_state(p.p_e, p.phases), p);
    const double expect_heralds = res.herald_probability * opt.n_trials;
    const double sigma = std::sqrt(expect_heralds);
    CHECK(std::abs(static_cast<double>(s.n_heralds) - expect_heralds) <
          4.0 * sigma);

    // Population histogram after readout confusion: compare against the
    // channel-weight prediction pushed through the confusion matrix.
    const double total = res.w_psi + res.w_ee + res.w_double_scatter + res.w_dark;
    const Eigen::Matrix4cd& rho = res.state.rho;
    const double p_gg = rho(0, 0).real();
    const double p_single = rho(1, 1).real() + rho(2, 2).real();
    const double p_ee = rho(3, 3).real();
    (void)total;
    const double f = p.readout_fidelity;
    const double m = (1.0 - f) / 2.0;
    const std::array<double, 3> truth{p_gg, p_single, p_ee};
    std::array<double, 3> meas{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        meas[i] += (i == j ? f : m) * truth[j];
    for (int i = 0; i < 3; ++i) {
      const double n = static_cast<double>(s.n_heralds);
      const double se = std::sqrt(meas[i] * (1.0 - meas[i]) / n);
      CHECK(std::abs(s.fractions[i] - meas[i]) < 5.0 * se + 1e-3);
    }
  }
}

TEST_CASE("protocol parameter validation") {
  ProtocolParams p;
  p.p_e = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.p_e = 0.07;
  p.eta = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.eta = 8e-4;
  p.readout_fidelity = 1.2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
