#include "nsm/security.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nsm/error.hpp"
#include "nsm/stats.hpp"

namespace nsm {

namespace {

double zeta_of(const SecurityConfig& cfg)
{
  return cfg.regime == Regime::finite ? chernoff_halfwidth(cfg.M, cfg.eps_interval) : 0.0;
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double eps_rate(double delta) { return delta * delta / (512.0 * std::pow(4.0 + std::log2(1.0 / delta), 2)); }

Conditions conditions_for(const SourceCharacterization& ch, double capacity, double nu,
                          const std::optional<DecoyEstimate>& decoy)
{
  Conditions c;
  const double p1 = ch.p1_sent();
  if (p1 > 0.0) {
    double r1 = clamp01((ch.p_h_B_no_click - ch.p_d_B_no_click) / p1);
    if (decoy)
      r1 = std::min(r1, 1.0 - clamp01(decoy->tau_asymptotic));
    c.single_photon_margin = 1.0 - r1;
  }
  c.storage_load = capacity * nu;
  c.storage_threshold = ch.p_h1_click > 0.0 ? 0.5 * c.single_photon_margin / ch.p_h1_click : 0.0;
  return c;
}

template <class F>
std::pair<double, double> golden_min(F f, double a, double b, double tol)
{
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

} // namespace

std::string to_string(Regime regime) { return regime == Regime::finite ? "finite" : "asymptotic"; }

Regime parse_regime(const std::string& s)
{
  if (s == "asymptotic")
    return Regime::asymptotic;
  if (s == "finite")
    return Regime::finite;
  throw DomainError("unknown regime '" + s + "' (expected asymptotic or finite)");
}

void SecurityConfig::validate() const
{
  require(delta > 0.0 && delta < 0.5, "delta must lie in (0, 1/2)");
  require(M >= 1.0, "M must be at least 1");
  require(eps_interval > 0.0 && eps_interval <= 1.0, "eps_interval must lie in (0, 1]");
  require(r1_grid_steps >= 1, "r1_grid_steps must be positive");
}

double m_store(const SourceCharacterization& ch, double M)
{
  require(M >= 1.0, "M must be at least 1");
  return ch.p1_sent() * ch.p_h1_click * M;
}

double rate_R(double delta, double r1, double p_h1_click, double finite_factor)
{
  if (!(p_h1_click > 0.0))
    return 0.0;
  return std::max(0.0, (0.5 - delta) * (1.0 - r1) * finite_factor / p_h1_click);
}

double r1_bound(const SourceCharacterization& ch, const SecurityConfig& cfg, const std::optional<DecoyEstimate>& decoy)
{
  const double z = zeta_of(cfg);
  const double denom = ch.p1_sent() - z;
  if (!(denom > 0.0))
    throw DegenerateError("single-photon fraction does not exceed its interval half-width");
  double r1 = clamp01((ch.p_h_B_no_click - ch.p_d_B_no_click + 2.0 * z) / denom);
  if (decoy)
    r1 = std::min(r1, 1.0 - clamp01(decoy->tau_for(cfg.regime)));
  return r1;
}

Conditions security_conditions(const SourceCharacterization& ch, const NoisyStorage& storage,
                               const std::optional<DecoyEstimate>& decoy)
{
  storage.validate();
  return conditions_for(ch, depolarizing_capacity(storage.d, storage.r), storage.nu, decoy);
}

EpsilonBound epsilon_bound(const SourceCharacterization& ch, const SecurityConfig& cfg,
                           const std::optional<DecoyEstimate>& decoy)
{
  cfg.validate();
  const double k = eps_rate(cfg.delta);
  const double p1 = ch.p1_sent();
  EpsilonBound e;
  if (decoy) {
    e.raw = (1.0 + decoy->settings) * 2.0 * std::exp(-k * decoy->tau_for(cfg.regime) * p1 * cfg.M);
  } else {
    double margin = p1 - ch.p_h_B_no_click + ch.p_d_B_no_click;
    if (cfg.regime == Regime::finite) {
      const double z = zeta_of(cfg);
      const double denom = p1 - z;
      margin = denom > 0.0 ? p1 - p1 * (ch.p_h_B_no_click - ch.p_d_B_no_click + 2.0 * z) / denom
                           : -std::numeric_limits<double>::infinity();
    }
    e.raw = 4.0 * std::exp(-k * margin * cfg.M);
  }
  e.value = clamp01(e.raw);
  return e;
}

double decoy_yield_bound(double mu, double mu_hat, double q_vacuum, double q_decoy, double q_signal)
{
  require(mu_hat > 0.0 && mu_hat < mu, "decoy intensity must satisfy 0 < mu_hat < mu");
  const double mu2 = mu * mu, mh2 = mu_hat * mu_hat;
  return mu / (mu * mu_hat - mh2) *
         (q_decoy * std::exp(mu_hat) - q_signal * std::exp(mu) * mh2 / mu2 - (mu2 - mh2) / mu2 * q_vacuum);
}

DecoyEstimate decoy_tau(const SourceCharacterization& signal, const SourceCharacterization& decoy,
                        const SourceCharacterization& vacuum, DecoyCounts counts, double eps_interval)
{
  require(signal.source.kind == SourceKind::wcp && decoy.source.kind == SourceKind::wcp,
          "decoy estimation needs weak coherent signal and decoy settings");
  require(vacuum.source.kind == SourceKind::vacuum, "third decoy setting must be vacuum");
  require(counts.vacuum >= 0 && counts.decoy >= 0 && counts.signal >= 0, "counts must be non-negative");
  DecoyEstimate e;
  e.mu = signal.source.mu;
  e.mu_hat = decoy.source.mu;
  e.q_vacuum = vacuum.p_h_B_click;
  e.q_decoy = decoy.p_h_B_click;
  e.q_signal = signal.p_h_B_click;
  auto z = [&](double n) { return n > 0 ? chernoff_halfwidth(n, eps_interval) : 0.0; };
  e.zeta_vacuum = z(counts.vacuum);
  e.zeta_decoy = z(counts.decoy);
  e.zeta_signal = z(counts.signal);
  e.tau_asymptotic = clamp01(decoy_yield_bound(e.mu, e.mu_hat, e.q_vacuum, e.q_decoy, e.q_signal));
  // Alice accepts measured gains up to one half-width away, so the true gain may sit two away.
  e.tau = clamp01(decoy_yield_bound(e.mu, e.mu_hat, e.q_vacuum + 2 * e.zeta_vacuum, e.q_decoy - 2 * e.zeta_decoy,
                                    e.q_signal + 2 * e.zeta_signal));
  e.tau = std::min(e.tau, e.tau_asymptotic);
  return e;
}

DecoyEstimate decoy_tau(const DetectorModel& det, double mu, double mu_hat, DecoyCounts counts, double eps_interval)
{
  require(mu_hat > 0.0 && mu_hat < mu, "decoy intensity must satisfy 0 < mu_hat < mu");
  return decoy_tau(characterize_wcp(SourceModel::wcp(mu), det), characterize_wcp(SourceModel::wcp(mu_hat), det),
                   characterize_vacuum(SourceModel::vacuum(), det), counts, eps_interval);
}

SecurityReport lambda_rate(const SourceCharacterization& ch, const StrongConverseChannel& channel, double nu,
                           const SecurityConfig& cfg, const std::optional<DecoyEstimate>& decoy)
{
  cfg.validate();
  require(std::isfinite(nu) && nu > 0.0, "storage rate nu must be positive");
  SecurityReport rep;
  rep.conditions = conditions_for(ch, channel.capacity(), nu, decoy);
  rep.zeta = zeta_of(cfg);
  rep.M_store = m_store(ch, cfg.M);
  rep.eps = epsilon_bound(ch, cfg, decoy);
  rep.r_profile.assign(ch.pn_sent.size(), 0.0);

  if (!rep.conditions.cond1()) {
    rep.reason = "every single-photon round can be reported missing";
    return rep;
  }
  if (!rep.conditions.cond2()) {
    rep.reason = "memory capacity times storage rate is too large";
    return rep;
  }
  if (cfg.delta >= 0.5 - rep.conditions.storage_load) {
    rep.reason = "delta must be below 1/2 - C nu";
    return rep;
  }

  const double M = cfg.M;
  const double z = rep.zeta;
  const double p1 = ch.p1_sent();
  if (!(p1 - z > 0.0)) {
    rep.reason = "too few single-photon rounds for the interval half-width";
    return rep;
  }
  const double factor = (p1 - z) / p1;
  const double M1 = (p1 - z) * M;
  rep.M_d_report = std::max(0.0, ch.p_h_B_no_click - ch.p_d_B_no_click + 2.0 * z) * M;
  rep.r1_max = r1_bound(ch, cfg, decoy);
  rep.m = (1.0 - ch.p_h_B_no_click + z) * M;
  if (!(rep.m > 0.0)) {
    rep.reason = "no rounds remain";
    return rep;
  }

  struct Class {
    int n;
    double rounds;
    double bits;   // per-round min-entropy a dishonest Bob cannot remove
  };
  std::vector<Class> classes;
  for (int n = 2; n < static_cast<int>(ch.pn_sent.size()); ++n) {
    const double pe = std::min(ch.pd_n_err[n], 0.5);
    classes.push_back({n, ch.pn_sent[n] * M, -std::log2(1.0 - pe)});
  }
  std::stable_sort(classes.begin(), classes.end(), [](const Class& a, const Class& b) { return a.bits > b.bits; });
  const bool multiphoton_entropy =
    std::any_of(classes.begin(), classes.end(), [](const Class& c) { return c.bits > 0 && c.rounds > 0; });

  auto objective = [&](double r1, std::vector<double>* profile) {
    const double R = rate_R(cfg.delta, r1, ch.p_h1_click, factor);
    double total = nu * channel.gamma(R / nu) * rep.M_store;
    double left = std::max(0.0, rep.M_d_report - r1 * M1);
    for (const auto& c : classes) {
      const double take = std::min(c.rounds, left);
      left -= take;
      total += c.bits * (c.rounds - take);
      if (profile)
        (*profile)[c.n] = c.rounds > 0 ? take / c.rounds : 0.0;
    }
    return total;
  };

  const double hi = rep.r1_max;
  double best_r1 = hi;
  double best = objective(hi, nullptr);
  if (multiphoton_entropy && hi > 0.0) {
    // The objective is convex in r1; grid, kinks of the greedy allocation, then a local refinement.
    const int steps = cfg.r1_grid_steps;
    auto consider = [&](double r1) {
      const double v = objective(r1, nullptr);
      if (v < best) {
        best = v;
        best_r1 = r1;
      }
    };
    for (int i = 0; i <= steps; ++i)
      consider(hi * i / steps);
    double filled = 0.0;
    for (const auto& c : classes) {
      filled += c.rounds;
      const double r1 = (rep.M_d_report - filled) / M1;
      if (r1 > 0.0 && r1 < hi)
        consider(r1);
    }
    const double w = hi / steps;
    const auto [x, v] = golden_min([&](double r1) { return objective(r1, nullptr); }, std::max(0.0, best_r1 - w),
                                   std::min(hi, best_r1 + w), 1e-13);
    if (v < best) {
      best = v;
      best_r1 = x;
    }
  }

  objective(best_r1, &rep.r_profile);
  rep.r_profile[1] = best_r1;
  rep.r1 = best_r1;
  rep.R = rate_R(cfg.delta, best_r1, ch.p_h1_click, factor);
  rep.numerator = best;
  rep.lambda = best / rep.m;
  rep.secure = *rep.lambda > 0.0;
  if (!rep.secure)
    rep.reason = "min-entropy rate is zero";
  return rep;
}

SecurityReport lambda_rate(const SourceCharacterization& ch, const NoisyStorage& storage, const SecurityConfig& cfg,
                           const std::optional<DecoyEstimate>& decoy)
{
  storage.validate();
  return lambda_rate(ch, storage.channel(), storage.nu, cfg, decoy);
}

SecurityReport maximize_lambda_over_delta(const SourceCharacterization& ch, const NoisyStorage& storage,
                                          SecurityConfig cfg, const std::optional<DecoyEstimate>& decoy, int steps)
{
  require(steps >= 1, "delta sweep needs at least one step");
  storage.validate();
  const double top = 0.5 - depolarizing_capacity(storage.d, storage.r) * storage.nu;
  SecurityReport best;
  bool have = false;
  for (int i = 1; i <= steps && top > 0.0; ++i) {
    cfg.delta = top * i / (steps + 1);
    auto rep = lambda_rate(ch, storage, cfg, decoy);
    if (!have || rep.lambda.value_or(-1.0) > best.lambda.value_or(-1.0)) {
      best = std::move(rep);
      have = true;
    }
  }
  if (!have) {
    cfg.delta = 0.25;
    best = lambda_rate(ch, storage, cfg, decoy);
  }
  return best;
}

double minimal_beta(double lambda, double omega)
{
  require(lambda > 0.0, "lambda must be positive");
  const double x = 256.0 * omega * omega / (lambda * lambda);
  return std::max(67.0, std::ceil(x * (1.0 - 1e-12)));
}

OtLength ot_length(const OtParameters& p)
{
  if (!(p.omega >= 2.0))
    throw ConstraintError("omega >= 2 violated");
  if (!(p.lambda > 0.0))
    throw ConstraintError("lambda > 0 violated");
  const double need = 256.0 * p.omega * p.omega / (p.lambda * p.lambda);
  if (!(p.beta >= 67.0 && p.beta >= need * (1.0 - 1e-12)))
    throw ConstraintError("beta >= max(67, 256 omega^2 / lambda^2) violated");
  if (!(p.m >= 4.0 * p.beta))
    throw ConstraintError("m >= 4 beta violated");
  require(p.p_err >= 0.0 && p.p_err <= 0.5, "p_err must lie in [0, 1/2]");
  require(p.code_overhead >= 1.0, "code overhead must be at least 1");
  require(p.wsee_eps >= 0.0, "wsee_eps must be non-negative");

  const double leak = p.lambda * p.lambda / (512.0 * p.omega * p.omega * p.beta);
  OtLength r;
  r.coefficient = (p.omega - 1.0) / p.omega * p.lambda / 8.0 - leak - p.code_overhead * binary_entropy(p.p_err) / 8.0;
  r.ell = std::floor(r.coefficient * p.m - 0.5);
  r.error = 41.0 * std::exp2(-leak * p.m) + 2.0 * p.wsee_eps;
  r.feasible = r.ell >= 1.0;
  return r;
}

} // namespace nsm
