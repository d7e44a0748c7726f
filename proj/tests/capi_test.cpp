#include "doctest.h"

#include "ionsim.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("c api version and error reporting") {
  CHECK(ionsim_version() != nullptr);
  CHECK(std::strlen(ionsim_version()) > 0);

  ionsim_two_level_params p{-1.0, 0.04, 0.0};
  double out = 0.0;
  CHECK(ionsim_transmission(0.0, &p, &out) == IONSIM_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(ionsim_last_error()) > 0);

  CHECK(ionsim_transmission(0.0, nullptr, &out) == IONSIM_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api lineshape round trip") {
  ionsim_two_level_params p{5.5, 0.04, 0.0};
  double out = 0.0;
  REQUIRE(ionsim_transmission(0.0, &p, &out) == IONSIM_OK);
  CHECK(out == doctest::Approx(0.8464).epsilon(1e-12));

  double re = 0.0, im = 0.0;
  REQUIRE(ionsim_lorentzian(5.5, &p, &re, &im) == IONSIM_OK);
  CHECK(re == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(im == doctest::Approx(-0.5).epsilon(1e-12));

  REQUIRE(ionsim_phase_shift(5.5, &p, &out) == IONSIM_OK);
  CHECK(out == doctest::Approx(0.04164257909858843).epsilon(1e-12));

  ionsim_doublet_params dp{{5.5, 0.008, 0.0}, 9.0, 0.9, 0.1};
  double stokes[6];
  REQUIRE(ionsim_polarimetry(-9.0, &dp, stokes) == IONSIM_OK);
  CHECK(stokes[0] == doctest::Approx(0.985516251687).epsilon(1e-9));
  double exact = 0.0, est = 0.0;
  REQUIRE(ionsim_faraday_angle(-9.0, &dp, &exact, &est) == IONSIM_OK);
  CHECK(exact == doctest::Approx(-2.204268791368e-04).epsilon(1e-9));

  ionsim_lambda_params lp{5.5, 0.0, 2.0, 0.0};
  REQUIRE(ionsim_eit_susceptibility(0.0, &lp, &re, &im) == IONSIM_OK);
  CHECK(re == doctest::Approx(0.0).scale(1.0));
  CHECK(im == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("c api mirror functions") {
  double out = 0.0;
  REQUIRE(ionsim_fp_transmission_phi(0.04, 0.5, 0.0, &out) == IONSIM_OK);
  CHECK(out == doctest::Approx(0.6888020833333335).epsilon(1e-12));
  REQUIRE(ionsim_qed_transmission_phi(0.04, 0.5, kPi, &out) == IONSIM_OK);
  CHECK(out == doctest::Approx(0.5869082840236686).epsilon(1e-12));

  ionsim_cavity_params cp{0.04, 0.5, 0.3, 493e-9};
  REQUIRE(ionsim_finesse(&cp, &out) == IONSIM_OK);
  CHECK(out == doctest::Approx(0.12586509028805262).epsilon(1e-12));

  std::vector<double> pos(11), t(11), rp(11);
  for (int i = 0; i < 11; ++i) pos[i] = -123e-9 + 24.6e-9 * i;
  REQUIRE(ionsim_fringe_scan(&cp, pos.data(), pos.size(), 1.0, t.data(),
                             rp.data()) == IONSIM_OK);
  for (double v : t) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("c api scheme lifecycle and spectrum") {
  ionsim_preset_options opt;
  ionsim_preset_options_default(&opt);
  CHECK(opt.gamma == doctest::Approx(5.5));

  ionsim_scheme* s = ionsim_scheme_preset("two_level", &opt);
  REQUIRE(s != nullptr);
  CHECK(ionsim_scheme_dim(s) == 2);

  const int n = 2;
  std::vector<double> rho(2 * n * n, -1.0);
  REQUIRE(ionsim_steady_state(s, rho.data()) == IONSIM_OK);
  // ground population is rho[0] (re of element 0,0); trace is one
  CHECK(rho[0] + rho[2 * (n + 1)] == doctest::Approx(1.0).epsilon(1e-9));

  const double grid[3] = {-5.5, 0.0, 5.5};
  double trans[3], phase[3];
  REQUIRE(ionsim_probe_spectrum(s, grid, 3, trans, phase) == IONSIM_OK);
  CHECK(trans[1] == doctest::Approx(0.8464).epsilon(1e-3));
  CHECK(phase[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  ionsim_scheme_free(s);

  CHECK(ionsim_scheme_preset("no_such_preset", &opt) == nullptr);
  CHECK(std::strlen(ionsim_last_error()) > 0);
  CHECK(ionsim_scheme_load("/nonexistent/path.json") == nullptr);
}

TEST_CASE("c api entangle analytics and states") {
  double f = 0.0, ps = 0.0;
  REQUIRE(ionsim_analytic_single_photon(0.07, 8e-4, &f, &ps) == IONSIM_OK);
  CHECK(f == doctest::Approx(0.9300520829166432).epsilon(1e-12));
  CHECK(ps == doctest::Approx(0.000111993728).epsilon(1e-12));

  double e2 = 0.0, te2 = 0.0;
  REQUIRE(ionsim_analytic_two_photon(8e-4, &e2, &te2) == IONSIM_OK);
  CHECK(te2 == doctest::Approx(1.28e-6).epsilon(1e-12));

  double ratio = 0.0;
  REQUIRE(ionsim_success_ratio(1e-3, 0.9, &ratio) == IONSIM_OK);
  CHECK(ratio == doctest::Approx(200.16012609727292).epsilon(1e-12));

  const double stages[5] = {0.04, 0.1, 0.6, 0.5, 0.66};
  double eta = 0.0;
  REQUIRE(ionsim_detection_chain(stages, 5, &eta) == IONSIM_OK);
  CHECK(eta == doctest::Approx(7.92e-4).epsilon(1e-12));

  ionsim_protocol_params pp;
  ionsim_protocol_params_default(&pp);
  CHECK(pp.p_e == doctest::Approx(0.07));

  double rho[32];
  double herald = 0.0;
  REQUIRE(ionsim_herald_project(&pp, rho, &herald) == IONSIM_OK);
  CHECK(herald > 0.0);

  double fid = 0.0;
  REQUIRE(ionsim_fidelity(rho, &fid) == IONSIM_OK);
  CHECK(fid > 0.6);
  CHECK(fid < 0.7);

  double par = 0.0;
  REQUIRE(ionsim_parity(rho, &par) == IONSIM_OK);

  double rot[32];
  REQUIRE(ionsim_rotate(rho, kPi / 2.0, 0.3, rot) == IONSIM_OK);
  double tr = rot[0] + rot[2 * 5] + rot[2 * 10] + rot[2 * 15];
  CHECK(tr == doctest::Approx(1.0).epsilon(1e-9));

  const double phis[4] = {0.0, kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0};
  double values[4], contrast = 0.0, offset = 0.0;
  REQUIRE(ionsim_parity_scan(rho, 1, phis, 4, values, &contrast, &offset) ==
          IONSIM_OK);
  CHECK(contrast >= 0.0);
  // phi -> 0 double-pulse parity equals twice the ge/eg coherence.
  CHECK(values[0] == doctest::Approx(2.0 * rho[2 * 9]).epsilon(1e-9));
}

TEST_CASE("c api monte carlo") {
  ionsim_protocol_params pp;
  ionsim_protocol_params_default(&pp);

  ionsim_mc_stats s1{}, s2{};
  REQUIRE(ionsim_monte_carlo(&pp, 50000, 7, &s1) == IONSIM_OK);
  REQUIRE(ionsim_monte_carlo(&pp, 50000, 7, &s2) == IONSIM_OK);
  CHECK(s1.n_heralds == s2.n_heralds);
  CHECK(s1.counts[0] == s2.counts[0]);
  CHECK(s1.counts[1] == s2.counts[1]);
  CHECK(s1.counts[2] == s2.counts[2]);

  const double phis[2] = {0.0, kPi / 2.0};
  double mean[2], se[2];
  uint64_t n[2];
  ionsim_mc_stats s3{};
  REQUIRE(ionsim_monte_carlo_parity(&pp, 50000, 7, 1, phis, 2, mean, se, n,
                                    &s3) == IONSIM_OK);
  CHECK(n[0] + n[1] == s3.n_heralds);
}
