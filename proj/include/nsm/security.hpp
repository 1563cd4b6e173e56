#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsm/sources.hpp"
#include "nsm/storage.hpp"

namespace nsm {

enum class Regime { asymptotic, finite };

std::string to_string(Regime regime);
Regime parse_regime(const std::string& s);

struct SecurityConfig {
  double delta = 0.01;
  double M = 1e8;              // rounds Alice keeps (signal rounds when decoys are used)
  double eps_interval = 1e-6;  // failure probability of each statistical interval
  Regime regime = Regime::asymptotic;
  int r1_grid_steps = 1000;

  void validate() const;
};

struct DecoyCounts {
  double vacuum = 0;
  double decoy = 0;
  double signal = 0;
};

// Lower bound on the single-photon yield from a vacuum, a weak decoy and a signal setting.
struct DecoyEstimate {
  double mu = 0;
  double mu_hat = 0;
  double q_vacuum = 0;
  double q_decoy = 0;
  double q_signal = 0;
  double zeta_vacuum = 0;
  double zeta_decoy = 0;
  double zeta_signal = 0;
  double tau_asymptotic = 0;
  double tau = 0;              // with interval corrections; equals tau_asymptotic when counts are zero
  int settings = 3;

  double tau_for(Regime regime) const { return regime == Regime::finite ? tau : tau_asymptotic; }
  bool informative() const { return tau > 0; }
};

double decoy_yield_bound(double mu, double mu_hat, double q_vacuum, double q_decoy, double q_signal);

// Honest gains come from the characterizations of the signal, decoy and vacuum settings.
// Zero counts mean no interval correction.
DecoyEstimate decoy_tau(const SourceCharacterization& signal, const SourceCharacterization& decoy,
                        const SourceCharacterization& vacuum, DecoyCounts counts, double eps_interval);
DecoyEstimate decoy_tau(const DetectorModel& det, double mu, double mu_hat, DecoyCounts counts,
                        double eps_interval);

struct Conditions {
  double single_photon_margin = 0;   // share of single-photon rounds Bob cannot report missing
  double storage_load = 0;           // C * nu
  double storage_threshold = 0;      // rate the memory must stay below
  bool cond1() const { return single_photon_margin > 0; }
  bool cond2() const { return cond1() && storage_load < storage_threshold; }
};

Conditions security_conditions(const SourceCharacterization& ch, const NoisyStorage& storage,
                               const std::optional<DecoyEstimate>& decoy = std::nullopt);

double m_store(const SourceCharacterization& ch, double M);

// Rate at which a dishonest Bob must push information through his memory.
// `finite_factor` is (p1 - zeta)/p1 in the finite regime.
double rate_R(double delta, double r1, double p_h1_click, double finite_factor = 1.0);

// Largest fraction of single-photon rounds a dishonest Bob can report missing.
double r1_bound(const SourceCharacterization& ch, const SecurityConfig& cfg,
                const std::optional<DecoyEstimate>& decoy = std::nullopt);

struct EpsilonBound {
  double raw = 0;     // may exceed 1
  double value = 0;   // clamped to [0, 1]
};

EpsilonBound epsilon_bound(const SourceCharacterization& ch, const SecurityConfig& cfg,
                           const std::optional<DecoyEstimate>& decoy = std::nullopt);

struct SecurityReport {
  Conditions conditions;
  bool secure = false;
  std::string reason;

  double zeta = 0;
  double M_store = 0;
  double M_d_report = 0;       // missing-report budget of a dishonest Bob
  double m = 0;                // length of the string Bob must not learn
  double r1_max = 0;
  double r1 = 0;               // minimizing single-photon report fraction
  double R = 0;                // storage rate at the minimizer
  double numerator = 0;        // min-entropy bound in bits
  std::optional<double> lambda;
  std::vector<double> r_profile;   // index 0..n_max, entry 0 unused
  EpsilonBound eps;
};

SecurityReport lambda_rate(const SourceCharacterization& ch, const StrongConverseChannel& channel, double nu,
                           const SecurityConfig& cfg,
                           const std::optional<DecoyEstimate>& decoy = std::nullopt);

SecurityReport lambda_rate(const SourceCharacterization& ch, const NoisyStorage& storage,
                           const SecurityConfig& cfg,
                           const std::optional<DecoyEstimate>& decoy = std::nullopt);

// Grid search over delta in (0, 1/2 - C nu).
SecurityReport maximize_lambda_over_delta(const SourceCharacterization& ch, const NoisyStorage& storage,
                                          SecurityConfig cfg,
                                          const std::optional<DecoyEstimate>& decoy = std::nullopt,
                                          int steps = 50);

struct OtParameters {
  double lambda = 0;
  double m = 0;
  double beta = 0;
  double omega = 2;
  double p_err = 0;
  double wsee_eps = 0;
  double code_overhead = 1.2;   // syndrome bits per bit, relative to h(p_err)
};

struct OtLength {
  double ell = 0;           // integer-valued
  double coefficient = 0;   // ell ~ coefficient * m
  double error = 0;
  bool feasible = false;
};

double minimal_beta(double lambda, double omega);

OtLength ot_length(const OtParameters& p);

} // namespace nsm
