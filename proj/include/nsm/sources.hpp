#pragma once

#include <string>
#include <vector>

namespace nsm {

struct DetectorModel {
  double eta = 1.0;       // channel transmittance times detector efficiency
  double p_dark = 0.0;    // dark-count probability per detector
  double e_det = 0.0;     // misalignment error

  void validate() const;
};

enum class SourceKind { wcp, pdc, ideal_single_photon, vacuum };

std::string to_string(SourceKind kind);
SourceKind parse_source_kind(const std::string& s);

struct SourceModel {
  SourceKind kind = SourceKind::wcp;
  double mu = 0.0;   // mean photon number per pulse (per pulse pair for PDC)
  int n_max = 40;

  static SourceModel wcp(double mu, int n_max = 40) { return {SourceKind::wcp, mu, n_max}; }
  static SourceModel pdc(double mu, int n_max = 40) { return {SourceKind::pdc, mu, n_max}; }
  static SourceModel ideal(int n_max = 40) { return {SourceKind::ideal_single_photon, 1.0, n_max}; }
  static SourceModel vacuum(int n_max = 40) { return {SourceKind::vacuum, 0.0, n_max}; }

  void validate() const;
};

// Probabilities of a protocol round, conditioned on Alice keeping the round.
// Superscript-style names follow the usual notation: h = honest Bob, d = dishonest Bob,
// S = from the signal alone, D = from dark counts alone, DS = from both.
struct SourceCharacterization {
  SourceModel source;
  DetectorModel detector;

  double p1_src = 0.0;              // single-photon probability at the source
  std::vector<double> pn_sent;      // photon number distribution of kept rounds, index 0..n_max
  double tail_mass = 0.0;           // 1 - sum(pn_sent)
  double alice_valid = 1.0;         // probability Alice keeps a round (PDC heralding), else 1

  double p_h1_click = 0.0;          // honest Bob clicks given one photon sent
  double p_h_B_S_no_click = 0.0;    // no signal photon reaches honest Bob
  double p_h_B_no_click = 0.0;      // honest Bob sees no click at all
  double p_h_B_click = 0.0;
  double p_d_B_no_click = 0.0;      // dishonest Bob's unavoidable no-click rounds
  double p_B_D_err = 0.0;           // error from dark counts alone
  double p_B_DS_err = 0.0;          // error from signal and dark count together
  double p_h_B_S_err = 0.0;         // error from signal alone
  double p_h_B_err = 0.0;           // total honest error
  double p_err_conditioned = 0.0;   // p_h_B_err / p_h_B_click

  std::vector<double> pd_n_err;     // dishonest Bob's minimal error on n-photon rounds, index 0..n_max

  double p1_sent() const { return pn_sent.size() > 1 ? pn_sent[1] : 0.0; }
  int n_max() const { return static_cast<int>(pn_sent.size()) - 1; }
  // Honest click probability for an n-photon round.
  double p_h_click_given(int n) const;
};

SourceCharacterization characterize_wcp(const SourceModel& src, const DetectorModel& det);
SourceCharacterization characterize_pdc(const SourceModel& src, const DetectorModel& det);
SourceCharacterization characterize_ideal(const SourceModel& src, const DetectorModel& det);
SourceCharacterization characterize_vacuum(const SourceModel& src, const DetectorModel& det);
SourceCharacterization characterize(const SourceModel& src, const DetectorModel& det);

// Pair emission probability of the down-conversion source.
double pdc_emission(double mu, int n);
// Residual mass of pdc_emission beyond n_max.
double pdc_emission_tail(double mu, int n_max);

// Minimal error of a dishonest receiver distinguishing Alice's two heralded
// n-photon states. Does not depend on mu.
double pdc_dishonest_error(double mu, double eta, double p_dark, int n);

struct ConditionedError {
  double value;
  bool clamped;   // raw value exceeded 1/2
};

ConditionedError conditioned_bit_error(const SourceCharacterization& ch);

// Worst case for the honest parties: multi-photon rounds leak everything.
SourceCharacterization without_multiphoton_error(SourceCharacterization ch);

inline constexpr double truncation_tolerance = 1e-10;

} // namespace nsm
