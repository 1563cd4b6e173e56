#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nsm/channel.hpp"
#include "nsm/error.hpp"
#include "nsm/sources.hpp"
#include "oracles.hpp"

using namespace nsm;

namespace {

const DetectorModel reference_detector{0.7, 0.85e-6, 0.033};

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

} // namespace

TEST_CASE("wcp reference point")
{
  const auto ch = characterize_wcp(SourceModel::wcp(0.3), reference_detector);
  CHECK(ch.p1_src == doctest::Approx(0.22224546620451535).epsilon(1e-13));
  CHECK(ch.p1_sent() == doctest::Approx(0.22224546620451535).epsilon(1e-13));
  CHECK(ch.p_h1_click == doctest::Approx(0.7000005099997832).epsilon(1e-13));
  CHECK(ch.p_d_B_no_click == doctest::Approx(0.7408182206817179).epsilon(1e-13));
  CHECK(ch.p_h_B_S_no_click == doctest::Approx(0.8105842459701871).epsilon(1e-13));
  CHECK(ch.p_h_B_no_click == doctest::Approx(0.8105828679775546).epsilon(1e-13));
  CHECK(ch.p_B_D_err == doctest::Approx(8.4999963875e-07).epsilon(1e-12));
  CHECK(ch.p_B_DS_err == doctest::Approx(8.581480284706163e-08).epsilon(1e-10));
  CHECK(ch.p_h_B_S_err == doctest::Approx(0.006250719882983827).epsilon(1e-12));
  CHECK(ch.p_h_B_err == doctest::Approx(0.0062514840678836395).epsilon(1e-12));
  CHECK(ch.p_err_conditioned == doctest::Approx(0.03300379433019215).epsilon(1e-11));
  for (int n = 1; n <= ch.n_max(); ++n)
    CHECK(ch.pd_n_err[n] == 0.0);
}

TEST_CASE("pdc reference points from direct enumeration")
{
  {
    const auto ch = characterize_pdc(SourceModel::pdc(0.05), reference_detector);
    CHECK(ch.alice_valid == doctest::Approx(0.033808035302167944).epsilon(1e-11));
    CHECK(ch.p_h_B_click == doctest::Approx(0.7081454938117343).epsilon(1e-11));
    CHECK(ch.p_h_B_err == doctest::Approx(0.026469773508002416).epsilon(1e-11));
    CHECK(ch.p_h_B_S_no_click == doctest::Approx(0.2918550023415589).epsilon(1e-11));
    CHECK(ch.p_err_conditioned == doctest::Approx(0.037379004370307556).epsilon(1e-11));
    CHECK(ch.pn_sent[0] == doctest::Approx(4.7860903001111845e-05).epsilon(1e-10));
    CHECK(ch.pn_sent[1] == doctest::Approx(0.9613387807110892).epsilon(1e-12));
    CHECK(ch.pn_sent[2] == doctest::Approx(0.03751564008960404).epsilon(1e-11));
    CHECK(ch.pn_sent[3] == doctest::Approx(0.001069424352318794).epsilon(1e-10));
    CHECK(ch.p_d_B_no_click == ch.pn_sent[0]);
  }
  {
    const auto ch = characterize_pdc(SourceModel::pdc(0.3), DetectorModel{0.5, 1e-3, 0.02});
    CHECK(ch.alice_valid == doctest::Approx(0.13139902650081114).epsilon(1e-11));
    CHECK(ch.p_h_B_no_click == doctest::Approx(0.43997879287569996).epsilon(1e-11));
    CHECK(ch.p_h_B_err == doctest::Approx(0.035429882095562124).epsilon(1e-11));
    CHECK(ch.p_h_B_S_no_click == doctest::Approx(0.44086007215994816).epsilon(1e-11));
    CHECK(ch.pn_sent[2] == doctest::Approx(0.19575825800233576).epsilon(1e-11));
  }
}

TEST_CASE("distribution invariants")
{
  for (auto src : {SourceModel::wcp(0.01), SourceModel::wcp(0.5), SourceModel::wcp(2.0), SourceModel::pdc(0.01),
                   SourceModel::pdc(0.3), SourceModel::pdc(1.0), SourceModel::ideal(), SourceModel::vacuum()}) {
    for (double eta : {0.0, 0.1, 0.7, 1.0}) {
      const DetectorModel det{eta, 1e-4, 0.02};
      const auto ch = characterize(src, det);
      CAPTURE(to_string(src.kind));
      CAPTURE(src.mu);
      CAPTURE(eta);
      CHECK(ch.tail_mass < truncation_tolerance);
      CHECK(sum(ch.pn_sent) == doctest::Approx(1.0).epsilon(1e-10));
      for (double p : ch.pn_sent)
        CHECK(p >= 0.0);
      for (double p : {ch.p_h1_click, ch.p_h_B_no_click, ch.p_h_B_S_no_click, ch.p_d_B_no_click, ch.p_B_D_err,
                       ch.p_B_DS_err, ch.p_h_B_S_err, ch.p_h_B_err}) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
      }
      CHECK(ch.p_h_B_click == doctest::Approx(1.0 - ch.p_h_B_no_click));
      CHECK(ch.p_h_B_err <= ch.p_h_B_click + 1e-15);
      for (std::size_t n = 1; n < ch.pd_n_err.size(); ++n) {
        CHECK(ch.pd_n_err[n] >= 0.0);
        CHECK(ch.pd_n_err[n] <= 0.5);
      }
    }
  }
}

TEST_CASE("no dark counts and no misalignment means no honest error")
{
  for (auto src : {SourceModel::wcp(0.3), SourceModel::ideal()}) {
    const auto ch = characterize(src, DetectorModel{0.6, 0.0, 0.0});
    CHECK(ch.p_h_B_err == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(ch.p_B_D_err == 0.0);
  }
  // Multi-pair emission still puts photons in Bob's wrong mode.
  CHECK(characterize_pdc(SourceModel::pdc(0.3), DetectorModel{0.6, 0.0, 0.0}).p_h_B_err > 0.0);
}

TEST_CASE("dishonest no-click bounded by honest no-click for wcp")
{
  for (double mu : {0.05, 0.3, 1.0})
    for (double eta : {0.1, 0.5, 0.9}) {
      const auto ch = characterize_wcp(SourceModel::wcp(mu), DetectorModel{eta, 0.0, 0.0});
      CHECK(ch.p_d_B_no_click <= ch.p_h_B_no_click);
    }
}

TEST_CASE("single-photon click probability is linear in eta for p_dark = 0")
{
  for (double eta : {0.0, 0.25, 0.6, 1.0}) {
    const auto ch = characterize_wcp(SourceModel::wcp(0.3), DetectorModel{eta, 0.0, 0.0});
    CHECK(ch.p_h1_click == doctest::Approx(eta));
    CHECK(ch.p_h_click_given(1) == doctest::Approx(eta));
    CHECK(ch.p_h_click_given(3) == doctest::Approx(1 - std::pow(1 - eta, 3)));
  }
}

TEST_CASE("dishonest pdc error against the Helstrom oracle")
{
  for (int n = 1; n <= 6; ++n)
    for (double eta : {0.05, 0.3, 0.5, 0.8, 1.0})
      for (double pd : {0.0, 1e-5, 0.05})
        CHECK(std::abs(pdc_dishonest_error(0.1, eta, pd, n) - oracle::helstrom_pdc(eta, pd, n)) <= 1e-12);

  // Hand-checkable values.
  for (double eta : {0.25, 0.5, 0.75, 1.0})
    CHECK(pdc_dishonest_error(0.1, eta, 0.0, 1) == 0.0);
  CHECK(pdc_dishonest_error(0.1, 0.5, 0.0, 2) == 0.125);
  CHECK(pdc_dishonest_error(0.1, 1.0, 0.0, 2) == 0.0);
  // Independent of mu.
  CHECK(pdc_dishonest_error(0.01, 0.4, 1e-3, 3) == pdc_dishonest_error(0.9, 0.4, 1e-3, 3));
}

TEST_CASE("dishonest pdc error does not increase with eta")
{
  for (int n = 2; n <= 8; ++n) {
    double prev = 1.0;
    for (int i = 1; i <= 100; ++i) {
      const double v = pdc_dishonest_error(0.1, i / 100.0, 0.0, n);
      CHECK(v <= prev + 1e-14);
      prev = v;
    }
  }
}

TEST_CASE("characterize_pdc fills pd_n_err from the Helstrom bound")
{
  const auto ch = characterize_pdc(SourceModel::pdc(0.2), DetectorModel{0.4, 1e-4, 0.0});
  for (int n = 1; n <= 6; ++n)
    CHECK(ch.pd_n_err[n] == doctest::Approx(oracle::helstrom_pdc(0.4, 1e-4, n)).epsilon(1e-12));
  const auto worst = without_multiphoton_error(ch);
  for (int n = 2; n <= worst.n_max(); ++n)
    CHECK(worst.pd_n_err[n] == 0.0);
}

TEST_CASE("emission distribution")
{
  double total = 0;
  for (int n = 0; n <= 40; ++n)
    total += pdc_emission(0.3, n);
  CHECK(total + pdc_emission_tail(0.3, 40) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pdc_emission_tail(0.3, -1) == doctest::Approx(1.0));
  CHECK(pdc_emission(0.0, 0) == 1.0);
}

TEST_CASE("errors")
{
  CHECK_THROWS_AS(characterize_pdc(SourceModel::pdc(4.0), reference_detector), TruncationError);
  CHECK_THROWS_AS(characterize_wcp(SourceModel::wcp(-0.1), reference_detector), DomainError);
  CHECK_THROWS_AS(characterize_wcp(SourceModel::wcp(0.3), DetectorModel{1.2, 0, 0}), DomainError);
  CHECK_THROWS_AS(characterize_wcp(SourceModel::wcp(0.3, 1), reference_detector), DomainError);
  CHECK_THROWS_AS(characterize_pdc(SourceModel::pdc(0.3), DetectorModel{0.0, 0.0, 0.0}), DegenerateError);
  const auto dead = characterize_wcp(SourceModel::wcp(0.3), DetectorModel{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(conditioned_bit_error(dead), DegenerateError);
  const auto noisy = characterize_wcp(SourceModel::wcp(0.3), DetectorModel{0.5, 0.0, 0.7});
  CHECK(conditioned_bit_error(noisy).clamped);
  CHECK(conditioned_bit_error(noisy).value == 0.5);
}

TEST_CASE("sampler reproduces the model on a short run")
{
  Rng rng(11);
  const auto src = SourceModel::wcp(0.3);
  const auto ch = characterize(src, reference_detector);
  const int N = 200000;
  int clicks = 0;
  for (int i = 0; i < N; ++i)
    clicks += sample_round(src, reference_detector, rng).bob_click;
  const double p = ch.p_h_B_click;
  CHECK(std::abs(clicks - p * N) <= 4 * std::sqrt(p * (1 - p) * N));
}
