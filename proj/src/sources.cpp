#include "nsm/sources.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nsm/error.hpp"

namespace nsm {

namespace {

bool unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

// Probability that a dark count fires in at least one of two detectors.
double any_dark(double pd) { return pd * (2.0 - pd); }

// Dark-count error when no signal photon arrives: one wrong click, or a double click resolved at random.
double dark_error(double pd) { return pd * (1.0 - pd) + 0.5 * pd * pd; }

// Shared by every source whose multi-photon signal lands in a single detector.
void fill_single_click_model(SourceCharacterization& ch)
{
  const auto& det = ch.detector;
  const double eb = 1.0 - det.eta;
  const double pd = det.p_dark;
  const double e = det.e_det;

  double s_nc = 0.0;
  double power = 1.0;
  for (double p : ch.pn_sent) {
    s_nc += p * power;
    power *= eb;
  }
  ch.p_h_B_S_no_click = std::min(1.0, s_nc);
  ch.p_h_B_S_err = e * (1.0 - s_nc);
  ch.p_B_DS_err = (1.0 - s_nc) * ((1.0 - e) * pd / 2.0 + e * pd * (1.5 - pd));
}

void fill_totals(SourceCharacterization& ch)
{
  const double pd = ch.detector.p_dark;
  ch.p_h1_click = ch.detector.eta + (1.0 - ch.detector.eta) * any_dark(pd);
  ch.p_B_D_err = dark_error(pd);
  ch.p_h_B_no_click = ch.p_h_B_S_no_click * (1.0 - any_dark(pd));
  ch.p_h_B_click = 1.0 - ch.p_h_B_no_click;
  ch.p_h_B_err = ch.p_h_B_S_err * (1.0 - pd) * (1.0 - pd) + ch.p_h_B_S_no_click * ch.p_B_D_err + ch.p_B_DS_err;
  ch.p_err_conditioned = ch.p_h_B_click > 0.0 ? ch.p_h_B_err / ch.p_h_B_click
                                              : std::numeric_limits<double>::quiet_NaN();
  ch.p_d_B_no_click = ch.pn_sent[0];
}

SourceCharacterization start(const SourceModel& src, const DetectorModel& det, SourceKind expected)
{
  if (src.kind != expected)
    throw DomainError("source kind does not match the characterization routine");
  src.validate();
  det.validate();
  SourceCharacterization ch;
  ch.source = src;
  ch.detector = det;
  ch.pn_sent.assign(src.n_max + 1, 0.0);
  ch.pd_n_err.assign(src.n_max + 1, 0.0);
  ch.pd_n_err[0] = 0.5;
  return ch;
}

void check_tail(double tail, const SourceModel& src)
{
  if (!(tail < truncation_tolerance))
    throw TruncationError("photon-number tail beyond n_max = " + std::to_string(src.n_max) + " is " +
                          std::to_string(tail) + "; increase n_max");
}

} // namespace

void DetectorModel::validate() const
{
  require(unit(eta), "eta must lie in [0, 1]");
  require(unit(p_dark), "p_dark must lie in [0, 1]");
  require(unit(e_det), "e_det must lie in [0, 1]");
}

void SourceModel::validate() const
{
  require(std::isfinite(mu) && mu >= 0.0, "mu must be a non-negative number");
  require(n_max >= 2, "n_max must be at least 2");
}

std::string to_string(SourceKind kind)
{
  switch (kind) {
  case SourceKind::wcp: return "wcp";
  case SourceKind::pdc: return "pdc";
  case SourceKind::ideal_single_photon: return "ideal";
  case SourceKind::vacuum: return "vacuum";
  }
  return "?";
}

SourceKind parse_source_kind(const std::string& s)
{
  if (s == "wcp")
    return SourceKind::wcp;
  if (s == "pdc")
    return SourceKind::pdc;
  if (s == "ideal")
    return SourceKind::ideal_single_photon;
  if (s == "vacuum")
    return SourceKind::vacuum;
  throw DomainError("unknown source kind '" + s + "' (expected wcp, pdc, ideal or vacuum)");
}

double SourceCharacterization::p_h_click_given(int n) const
{
  require(n >= 0, "photon number must be non-negative");
  const double pd = detector.p_dark;
  return 1.0 - (1.0 - any_dark(pd)) * std::pow(1.0 - detector.eta, n);
}

SourceCharacterization characterize_wcp(const SourceModel& src, const DetectorModel& det)
{
  auto ch = start(src, det, SourceKind::wcp);
  double term = std::exp(-src.mu);
  for (int n = 0; n <= src.n_max; ++n) {
    ch.pn_sent[n] = term;
    term *= src.mu / (n + 1);
  }
  const double total = std::accumulate(ch.pn_sent.begin(), ch.pn_sent.end(), 0.0);
  ch.tail_mass = std::max(0.0, 1.0 - total);
  check_tail(ch.tail_mass, src);
  ch.p1_src = src.mu * std::exp(-src.mu);
  fill_single_click_model(ch);
  fill_totals(ch);
  return ch;
}

SourceCharacterization characterize_ideal(const SourceModel& src, const DetectorModel& det)
{
  auto ch = start(src, det, SourceKind::ideal_single_photon);
  ch.pn_sent[1] = 1.0;
  ch.p1_src = 1.0;
  fill_single_click_model(ch);
  fill_totals(ch);
  return ch;
}

SourceCharacterization characterize_vacuum(const SourceModel& src, const DetectorModel& det)
{
  auto ch = start(src, det, SourceKind::vacuum);
  ch.pn_sent[0] = 1.0;
  fill_single_click_model(ch);
  fill_totals(ch);
  return ch;
}

double pdc_emission(double mu, int n)
{
  require(mu >= 0.0, "mu must be non-negative");
  require(n >= 0, "photon number must be non-negative");
  const double x = mu / 2.0;
  const double q = x / (1.0 + x);
  return (n + 1) * std::pow(q, n) * (1.0 - q) * (1.0 - q);
}

double pdc_emission_tail(double mu, int n_max)
{
  require(mu >= 0.0, "mu must be non-negative");
  const double x = mu / 2.0;
  const double q = x / (1.0 + x);
  return std::pow(q, n_max + 1) * ((n_max + 2) - (n_max + 1) * q);
}

SourceCharacterization characterize_pdc(const SourceModel& src, const DetectorModel& det)
{
  auto ch = start(src, det, SourceKind::pdc);
  ch.tail_mass = pdc_emission_tail(src.mu, src.n_max);
  check_tail(ch.tail_mass, src);

  const double eb = 1.0 - det.eta;
  const double pd = det.p_dark;
  const double e = det.e_det;
  double c = 0.0, s_err = 0.0, s_ok = 0.0;
  std::vector<double> ebp(src.n_max + 1);
  for (int n = 0; n <= src.n_max; ++n)
    ebp[n] = std::pow(eb, n);

  for (int n = 0; n <= src.n_max; ++n) {
    const double p = pdc_emission(src.mu, n);
    const double ebn = ebp[n];
    double signal = 0.0;
    for (int m = 0; m <= n; ++m)
      signal += ebp[m] - ebn;
    c += (1.0 - pd) * p * (signal / (n + 1) + pd * ebn);
    ch.pn_sent[n] = (1.0 - pd) * p * (pd * ebn + signal / (n + 1));

    // Heralded '0': Bob's wrong mode holds m photons, his right mode n - m.
    for (int m = 0; m <= n; ++m) {
      const double w = (1.0 - pd) * p / (n + 1) * (ebp[m] - ebn + pd * ebn);
      const double wrong = (1.0 - ebp[m]) * ebp[n - m];
      const double right = (1.0 - ebp[n - m]) * ebp[m];
      const double both = (1.0 - ebp[m]) * (1.0 - ebp[n - m]);
      s_err += w * ((1.0 - e) * wrong + e * right + 0.5 * both);
      s_ok += w * ((1.0 - e) * right + e * wrong + 0.5 * both);
    }
  }
  if (!(c > 0.0))
    throw DegenerateError("heralding probability is zero (eta = 0 and p_dark = 0)");

  double s_nc = 0.0;
  for (int n = 0; n <= src.n_max; ++n) {
    ch.pn_sent[n] /= c;
    s_nc += ch.pn_sent[n] * ebp[n];
  }
  ch.alice_valid = 2.0 * c;
  ch.p1_src = pdc_emission(src.mu, 1);
  ch.p_h_B_S_no_click = std::min(1.0, s_nc);
  ch.p_h_B_S_err = s_err / c;
  ch.p_B_DS_err = (s_err / c) * pd * (1.5 - pd) + (s_ok / c) * pd / 2.0;
  fill_totals(ch);
  for (int n = 1; n <= src.n_max; ++n)
    ch.pd_n_err[n] = pdc_dishonest_error(src.mu, det.eta, pd, n);
  return ch;
}

double pdc_dishonest_error(double mu, double eta, double p_dark, int n)
{
  require(mu >= 0.0, "mu must be non-negative");
  require(unit(eta) && unit(p_dark), "eta and p_dark must lie in [0, 1]");
  require(n >= 1, "photon number must be at least 1");
  const double eb = 1.0 - eta;
  // Common factors (1 - p_dark), the emission probability and 1/(n+1) cancel.
  double distance = 0.0, norm = (n + 1) * p_dark * std::pow(eb, n);
  for (int m = 0; m <= n; ++m) {
    distance += std::abs(std::pow(eb, m) - std::pow(eb, n - m));
    norm += std::pow(eb, m) - std::pow(eb, n);
  }
  if (!(norm > 0.0))
    throw DegenerateError("heralded n-photon state has zero probability");
  return 0.5 - 0.25 * distance / norm;
}

SourceCharacterization characterize(const SourceModel& src, const DetectorModel& det)
{
  switch (src.kind) {
  case SourceKind::wcp: return characterize_wcp(src, det);
  case SourceKind::pdc: return characterize_pdc(src, det);
  case SourceKind::ideal_single_photon: return characterize_ideal(src, det);
  case SourceKind::vacuum: return characterize_vacuum(src, det);
  }
  throw DomainError("unknown source kind");
}

ConditionedError conditioned_bit_error(const SourceCharacterization& ch)
{
  if (!(ch.p_h_B_click > 0.0))
    throw DegenerateError("honest click probability is zero; conditional error undefined");
  const double v = ch.p_h_B_err / ch.p_h_B_click;
  if (v > 0.5)
    return {0.5, true};
  return {v, false};
}

SourceCharacterization without_multiphoton_error(SourceCharacterization ch)
{
  for (std::size_t n = 2; n < ch.pd_n_err.size(); ++n)
    ch.pd_n_err[n] = 0.0;
  return ch;
}

} // namespace nsm
