#include "nsm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include "nsm/protocol.hpp"

namespace nsm::cli {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v)
{
  double x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw DomainError("'" + v + "' is not a number");
  return x;
}

long long to_integer(const std::string& v)
{
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    // Accept integral values written in floating-point notation, e.g. 1e6.
    const double d = to_double(v);
    if (d != std::floor(d) || std::abs(d) > 9e18)
      throw DomainError("'" + v + "' is not an integer");
    return static_cast<long long>(d);
  }
  return x;
}

int to_int(const std::string& v)
{
  const auto x = to_integer(v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw DomainError("'" + v + "' is out of range");
  return static_cast<int>(x);
}

bool set_axis(ScanAxis& axis, const std::string& field, const std::string& v)
{
  if (field.empty())
    axis.name = v;
  else if (field == "_min")
    axis.min = to_double(v);
  else if (field == "_max")
    axis.max = to_double(v);
  else if (field == "_steps")
    axis.steps = to_int(v);
  else if (field == "_scale") {
    require(v == "linear" || v == "log", "scale must be linear or log");
    axis.log = v == "log";
  } else
    return false;
  return true;
}

// Returns false for an unknown key.
bool apply(Config& cfg, const std::string& section, const std::string& key, const std::string& v)
{
  auto& p = cfg.protocol;
  if (section == "source") {
    if (key == "kind") {
      const auto mu = cfg.source.mu;
      cfg.source.kind = parse_source_kind(v);
      cfg.source.mu = cfg.source.kind == SourceKind::ideal_single_photon ? 1.0
                      : cfg.source.kind == SourceKind::vacuum           ? 0.0
                                                                          : mu;
    } else if (key == "mu")
      set_parameter(cfg, "mu", to_double(v));
    else if (key == "mu_hat")
      set_parameter(cfg, "mu_hat", to_double(v));
    else if (key == "n_max")
      cfg.source.n_max = to_int(v);
    else
      return false;
    cfg.source.validate();
  } else if (section == "detector") {
    if (key != "eta" && key != "p_dark" && key != "e_det")
      return false;
    set_parameter(cfg, key, to_double(v));
  } else if (section == "storage") {
    if (key != "d" && key != "r" && key != "nu")
      return false;
    set_parameter(cfg, key, to_double(v));
  } else if (section == "security") {
    if (key == "delta" || key == "M")
      set_parameter(cfg, key, to_double(v));
    else if (key == "eps_interval")
      cfg.security.eps_interval = to_double(v);
    else if (key == "regime")
      cfg.security.regime = parse_regime(v);
    else if (key == "r1_grid_steps")
      cfg.security.r1_grid_steps = to_int(v);
    else
      return false;
    cfg.security.validate();
  } else if (section == "protocol") {
    if (key == "pipeline")
      p.pipeline = v;
    else if (key == "rounds") {
      const auto x = to_integer(v);
      require(x >= 1, "rounds must be positive");
      p.rounds = static_cast<std::uint64_t>(x);
    } else if (key == "runs")
      p.runs = to_int(v);
    else if (key == "beta")
      p.beta = to_int(v);
    else if (key == "omega")
      set_parameter(cfg, "omega", to_double(v));
    else if (key == "ell")
      p.ell = to_int(v);
    else if (key == "t")
      p.t = to_int(v);
    else if (key == "code_radius")
      p.code_radius = to_int(v);
    else if (key == "code_overhead")
      p.code_overhead = to_double(v);
    else if (key == "lambda")
      p.lambda = to_double(v);
    else if (key == "p_err")
      p.p_err = to_double(v);
    else if (key == "wsee_fraction")
      p.wsee_fraction = to_double(v);
    else
      return false;
  } else if (section == "scan") {
    auto& s = cfg.scan;
    if (key.rfind("axis1", 0) == 0)
      return set_axis(s.axis1, key.substr(5), v);
    if (key.rfind("axis2", 0) == 0)
      return set_axis(s.axis2, key.substr(5), v);
    if (key == "rounds_min")
      s.rounds_min = to_double(v);
    else if (key == "rounds_max")
      s.rounds_max = to_double(v);
    else if (key == "rounds_points")
      s.rounds_points = to_int(v);
    else
      return false;
  }
  return true;
}

struct Evaluation {
  SourceCharacterization ch;
  std::optional<DecoyEstimate> decoy;
  SecurityReport report;
};

std::optional<DecoyEstimate> decoy_estimate(const Config& cfg)
{
  if (!cfg.mu_hat)
    return std::nullopt;
  // Each setting is assumed to be sent as often as the signal.
  const double n = cfg.security.regime == Regime::finite ? cfg.security.M : 0.0;
  return decoy_tau(cfg.detector, cfg.source.mu, *cfg.mu_hat, DecoyCounts{n, n, n}, cfg.security.eps_interval);
}

Evaluation evaluate(const Config& cfg)
{
  cfg.validate();
  Evaluation e{characterize(cfg.source, cfg.detector), decoy_estimate(cfg), {}};
  e.report = lambda_rate(e.ch, cfg.storage, cfg.security, e.decoy);
  return e;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

const char* flag(bool b) { return b ? "1" : "0"; }

void row(std::ostream& out, const std::string& name, double v) { out << name << ',' << format_number(v) << '\n'; }

std::string csv_text(std::string s)
{
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

} // namespace

double ScanAxis::value(int i) const
{
  if (steps <= 1)
    return min;
  const double f = double(i) / (steps - 1);
  return log ? min * std::pow(max / min, f) : min + (max - min) * f;
}

void Config::validate() const
{
  source.validate();
  detector.validate();
  storage.validate();
  security.validate();
  if (mu_hat) {
    require(source.kind == SourceKind::wcp, "decoy states need a wcp source");
    require(*mu_hat >= 0 && *mu_hat < source.mu, "mu_hat must satisfy 0 <= mu_hat < mu");
  }
  const auto& p = protocol;
  require(p.pipeline == "wsee" || p.pipeline == "decoy" || p.pipeline == "frot" || p.pipeline == "ot",
          "pipeline must be wsee, decoy, frot or ot");
  require(p.rounds >= 1 && p.runs >= 1, "rounds and runs must be positive");
  require(!p.beta || *p.beta >= 1, "beta must be positive");
  require(p.omega >= 2, "omega must be at least 2");
  require(p.ell >= 1, "ell must be positive");
  require(!p.t || *p.t >= 1, "t must be positive");
  require(!p.code_radius || *p.code_radius >= 0, "code_radius must be non-negative");
  require(p.code_overhead >= 1, "code_overhead must be at least 1");
  require(!p.lambda || *p.lambda > 0, "lambda must be positive");
  require(!p.p_err || (*p.p_err >= 0 && *p.p_err <= 0.5), "p_err must lie in [0, 1/2]");
  require(!p.wsee_fraction || (*p.wsee_fraction > 0 && *p.wsee_fraction <= 1), "wsee_fraction must lie in (0, 1]");
  for (const auto* a : {&scan.axis1, &scan.axis2}) {
    parameter_unit(a->name);
    require(a->steps >= 1, "axis steps must be positive");
    require(a->max >= a->min, "axis max must not be below min");
    require(!a->log || a->min > 0, "log axes need a positive minimum");
  }
  require(scan.axis1.name != scan.axis2.name, "scan axes must differ");
  require(scan.rounds_min >= 1 && scan.rounds_max >= scan.rounds_min && scan.rounds_points >= 1,
          "rounds sweep must satisfy 1 <= rounds_min <= rounds_max and rounds_points >= 1");
}

Config parse_config(std::istream& in)
{
  static const std::vector<std::string> sections = {"source", "detector", "storage", "security", "protocol", "scan"};
  Config cfg;
  std::string section, line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(lineno, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        throw ConfigError(lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(lineno, "expected key = value");
    const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError(lineno, "key '" + key + "' outside a section");
    bool known = false;
    try {
      known = apply(cfg, section, key, value);
    } catch (const std::exception& e) {
      throw ConfigError(lineno, key + ": " + e.what());
    }
    if (!known)
      throw ConfigError(lineno, "unknown key '" + key + "' in [" + section + "]");
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw DomainError("cannot open config file " + path);
  return parse_config(in);
}

void set_parameter(Config& cfg, const std::string& name, double value)
{
  require(std::isfinite(value), name + " must be finite");
  if (name == "eta")
    cfg.detector.eta = value;
  else if (name == "p_dark")
    cfg.detector.p_dark = value;
  else if (name == "e_det")
    cfg.detector.e_det = value;
  else if (name == "mu")
    cfg.source.mu = value;
  else if (name == "mu_hat") {
    require(value >= 0, "mu_hat must be non-negative");
    cfg.mu_hat = value;
  } else if (name == "r")
    cfg.storage.r = value;
  else if (name == "nu")
    cfg.storage.nu = value;
  else if (name == "d") {
    require(value == std::floor(value), "d must be an integer");
    cfg.storage.d = static_cast<int>(value);
  } else if (name == "delta")
    cfg.security.delta = value;
  else if (name == "M")
    cfg.security.M = value;
  else if (name == "omega") {
    require(value >= 2, "omega must be at least 2");
    cfg.protocol.omega = value;
  } else
    throw DomainError("unknown parameter '" + name + "'");
  cfg.source.validate();
  cfg.detector.validate();
  cfg.storage.validate();
  cfg.security.validate();
}

std::string parameter_unit(const std::string& name)
{
  static const std::map<std::string, std::string> units = {
      {"eta", "prob"},   {"p_dark", "prob"}, {"e_det", "prob"},  {"mu", "photons/pulse"},
      {"mu_hat", "photons/pulse"}, {"r", "1"}, {"nu", "uses/round"}, {"d", "dim"},
      {"delta", "1"},    {"M", "rounds"},    {"omega", "1"}};
  const auto it = units.find(name);
  if (it == units.end())
    throw DomainError("unknown parameter '" + name + "'");
  return it->second;
}

std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  std::ostringstream os;
  os << std::setprecision(9) << v;
  return os.str();
}

int cmd_params(const Config& cfg, std::ostream& out)
{
  cfg.validate();
  const auto ch = characterize(cfg.source, cfg.detector);
  out << "quantity,value [prob]\n";
  row(out, "p1_src", ch.p1_src);
  row(out, "p1_sent", ch.p1_sent());
  row(out, "tail_mass", ch.tail_mass);
  row(out, "alice_valid", ch.alice_valid);
  row(out, "p_h1_click", ch.p_h1_click);
  row(out, "p_h_B_S_no_click", ch.p_h_B_S_no_click);
  row(out, "p_h_B_no_click", ch.p_h_B_no_click);
  row(out, "p_h_B_click", ch.p_h_B_click);
  row(out, "p_d_B_no_click", ch.p_d_B_no_click);
  row(out, "p_B_D_err", ch.p_B_D_err);
  row(out, "p_B_DS_err", ch.p_B_DS_err);
  row(out, "p_h_B_S_err", ch.p_h_B_S_err);
  row(out, "p_h_B_err", ch.p_h_B_err);
  row(out, "p_err_conditioned", ch.p_err_conditioned);
  for (int n = 0; n <= ch.n_max(); ++n)
    row(out, "pn_sent[" + std::to_string(n) + "]", ch.pn_sent[n]);
  for (int n = 1; n <= ch.n_max(); ++n)
    row(out, "pd_n_err[" + std::to_string(n) + "]", ch.pd_n_err[n]);
  return ok;
}

int cmd_lambda(const Config& cfg, std::ostream& out)
{
  const auto e = evaluate(cfg);
  const auto& r = e.report;
  out << "quantity,value\n";
  out << "regime," << to_string(cfg.security.regime) << '\n';
  out << "cond1 [bool]," << flag(r.conditions.cond1()) << '\n';
  out << "cond2 [bool]," << flag(r.conditions.cond2()) << '\n';
  out << "secure [bool]," << flag(r.secure) << '\n';
  out << "reason," << csv_text(r.reason) << '\n';
  row(out, "delta [1]", cfg.security.delta);
  row(out, "M [rounds]", cfg.security.M);
  row(out, "M_store [rounds]", r.M_store);
  row(out, "m [bits]", r.m);
  row(out, "r1_max [1]", r.r1_max);
  row(out, "r1 [1]", r.r1);
  row(out, "R [bits/qubit]", r.R);
  out << "lambda [bits/bit]," << optional_number(r.lambda) << '\n';
  row(out, "eps [prob]", r.eps.value);
  row(out, "eps_raw [1]", r.eps.raw);
  if (e.decoy)
    row(out, "tau [prob]", e.decoy->tau_for(cfg.security.regime));
  return r.secure ? ok : infeasible;
}

int cmd_region(const Config& cfg, std::ostream& out, unsigned threads)
{
  cfg.validate();
  const auto& a1 = cfg.scan.axis1;
  const auto& a2 = cfg.scan.axis2;
  const std::size_t points = std::size_t(a1.steps) * a2.steps;
  std::vector<std::string> rows(points);
  std::vector<std::exception_ptr> errors(points);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < points;) {
      try {
        Config c = cfg;
        const double v1 = a1.value(int(i / a2.steps)), v2 = a2.value(int(i % a2.steps));
        set_parameter(c, a1.name, v1);
        set_parameter(c, a2.name, v2);
        const auto e = evaluate(c);
        std::ostringstream os;
        os << format_number(v1) << ',' << format_number(v2) << ',' << flag(e.report.conditions.cond1()) << ','
           << flag(e.report.conditions.cond2()) << ',' << optional_number(e.report.lambda) << ','
           << format_number(e.report.eps.value) << '\n';
        rows[i] = os.str();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, points));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);

  out << a1.name << " [" << parameter_unit(a1.name) << "]," << a2.name << " [" << parameter_unit(a2.name)
      << "],cond1 [bool],cond2 [bool],lambda [bits/bit],eps [prob]\n";
  for (const auto& r : rows)
    out << r;
  return ok;
}

int cmd_otrate(const Config& cfg, std::ostream& out)
{
  cfg.validate();
  const auto ch = characterize(cfg.source, cfg.detector);
  const auto decoy = decoy_estimate(cfg);
  const auto& p = cfg.protocol;
  const double p_err = p.p_err ? *p.p_err : ch.p_err_conditioned;
  out << "M [rounds],m [bits],beta [bits],lambda [bits/bit],p_err [prob],ell [bits],rate [bits/round],reason\n";
  bool any = false;
  const auto& s = cfg.scan;
  for (int i = 0; i < s.rounds_points; ++i) {
    const double M = std::round(ScanAxis{"M", s.rounds_min, s.rounds_max, s.rounds_points, true}.value(i));
    SecurityConfig sc = cfg.security;
    sc.M = M;
    const auto report = lambda_rate(ch, cfg.storage, sc, decoy);
    const auto lambda = p.lambda ? p.lambda : report.lambda;
    const double m = std::floor((p.wsee_fraction ? *p.wsee_fraction : report.m / M) * M);
    std::string beta, ell, rate, reason;
    if (!lambda)
      reason = report.reason.empty() ? "insecure" : report.reason;
    else if (!(p_err >= 0 && p_err <= 0.5))
      reason = "no bit error rate (no clicks)";
    else {
      const double b = p.beta ? double(*p.beta) : std::ceil(minimal_beta(*lambda, p.omega));
      beta = format_number(b);
      try {
        const auto len = ot_length({*lambda, m, b, p.omega, p_err, report.eps.value, p.code_overhead});
        ell = format_number(len.ell);
        if (len.feasible) {
          rate = format_number(len.ell / M);
          any = true;
        } else
          reason = "error correction exceeds the extractable entropy";
      } catch (const ConstraintError& e) {
        reason = e.what();
      }
    }
    out << format_number(M) << ',' << format_number(m) << ',' << beta << ',' << optional_number(lambda) << ','
        << format_number(p_err) << ',' << ell << ',' << rate << ',' << csv_text(reason) << '\n';
  }
  return any ? ok : infeasible;
}

int cmd_decoy(const Config& cfg, std::ostream& out)
{
  cfg.validate();
  require(cfg.mu_hat.has_value(), "decoy needs [source] mu_hat");
  const auto e = evaluate(cfg);
  const auto& d = *e.decoy;
  out << "quantity,value\n";
  row(out, "mu [photons/pulse]", d.mu);
  row(out, "mu_hat [photons/pulse]", d.mu_hat);
  row(out, "q_vacuum [prob]", d.q_vacuum);
  row(out, "q_decoy [prob]", d.q_decoy);
  row(out, "q_signal [prob]", d.q_signal);
  row(out, "zeta_vacuum [prob]", d.zeta_vacuum);
  row(out, "zeta_decoy [prob]", d.zeta_decoy);
  row(out, "zeta_signal [prob]", d.zeta_signal);
  row(out, "tau_asymptotic [prob]", d.tau_asymptotic);
  row(out, "tau [prob]", d.tau);
  row(out, "p_h1_click [prob]", e.ch.p_h1_click);
  row(out, "r1_max [1]", e.report.r1_max);
  out << "lambda [bits/bit]," << optional_number(e.report.lambda) << '\n';
  row(out, "eps [prob]", e.report.eps.value);
  out << "reason," << csv_text(e.report.reason) << '\n';
  return d.informative() && e.report.secure ? ok : infeasible;
}

int cmd_simulate(const Config& cfg, std::uint64_t seed, std::ostream& summary, std::ostream* transcript)
{
  cfg.validate();
  const auto& p = cfg.protocol;
  const bool decoy = p.pipeline == "decoy";
  const bool frot = p.pipeline == "frot" || p.pipeline == "ot";
  if (decoy)
    require(cfg.mu_hat.has_value() && cfg.source.kind == SourceKind::wcp, "decoy pipeline needs a wcp source and mu_hat");
  const auto ch = characterize(cfg.source, cfg.detector);
  const int beta = p.beta.value_or(32);
  std::optional<LinearCode> code;
  if (frot) {
    if (p.code_radius) {
      Rng code_rng(seed);
      code = LinearCode::lookup(beta, *p.code_radius, code_rng);
    } else {
      const double pe = std::isnan(ch.p_err_conditioned) ? 0.5 : ch.p_err_conditioned;
      code = LinearCode::for_error_rate(beta, pe, p.code_overhead);
    }
  }
  WseeConfig wc{p.rounds, cfg.security.eps_interval};
  FrotParams fp;
  fp.beta = beta;
  fp.omega = p.omega;
  fp.ell = p.ell;
  fp.t = p.t;

  int aborts = 0, completed = 0, strings = 0, recovered = 0, delivered = 0, decoded = 0;
  double total_m = 0, total_I = 0, errors = 0;
  std::string last_reason;
  for (int run = 0; run < p.runs; ++run) {
    const auto seeds = SessionSeeds::derive(seed + std::uint64_t(run));
    Transport link;
    const auto w = decoy ? run_wsee_decoy(wc, cfg.source.mu, *cfg.mu_hat, cfg.detector, link, seeds, nullptr,
                                          cfg.source.n_max)
                               .wsee
                         : run_wsee(wc, cfg.source, cfg.detector, link, seeds);
    bool aborted = w.aborted;
    if (!w.aborted) {
      ++strings;
      total_m += double(w.alice_x.size());
      total_I += double(w.bob_I.size());
      errors += double((select(w.alice_x, w.bob_I) ^ w.bob_z).count());
      if (frot) {
        const auto f = run_frot(w, fp, *code, link, seeds);
        aborted = f.aborted;
        if (f.aborted)
          last_reason = f.abort_reason;
        else {
          recovered += f.y == (f.c == 0 ? f.s0 : f.s1);
          decoded += f.decode_ok;
          if (p.pipeline == "ot") {
            Rng msg_rng = seeds.alice_rng(3);
            const Bits m0 = random_bits(p.ell, msg_rng), m1 = random_bits(p.ell, msg_rng);
            const int choice = int(seeds.bob_rng(3)() & 1);
            delivered += run_ot(f, m0, m1, choice, link) == (choice == 0 ? m0 : m1);
          }
        }
      }
    } else
      last_reason = w.abort_reason;
    aborts += aborted;
    completed += !aborted;
    if (run == 0 && transcript)
      *transcript << link.dump();
  }

  auto line = [&](const std::string& k, const std::string& v) { summary << k << ": " << v << '\n'; };
  line("pipeline", p.pipeline);
  line("runs", std::to_string(p.runs));
  line("aborts", std::to_string(aborts));
  line("abort_rate", format_number(double(aborts) / p.runs));
  if (!last_reason.empty())
    line("last_abort_reason", last_reason);
  line("mean_m [bits]", format_number(strings > 0 ? total_m / strings : 0));
  line("mean_I [bits]", format_number(strings > 0 ? total_I / strings : 0));
  line("errors", format_number(errors));
  line("empirical_p_err [prob]", format_number(total_I > 0 ? errors / total_I : 0));
  line("model_p_err [prob]", format_number(ch.p_err_conditioned));
  if (frot) {
    line("decoded", std::to_string(decoded) + "/" + std::to_string(completed));
    line("recovered_runs", std::to_string(recovered) + "/" + std::to_string(completed));
    line("recovered", completed > 0 && recovered == completed ? "true" : "false");
  }
  if (p.pipeline == "ot")
    line("delivered", std::to_string(delivered) + "/" + std::to_string(completed));
  return ok;
}

int run_command(const std::string& name, const Config& cfg, std::uint64_t seed, std::ostream& out,
                std::ostream& err, std::ostream* transcript)
{
  try {
    if (name == "params")
      return cmd_params(cfg, out);
    if (name == "lambda")
      return cmd_lambda(cfg, out);
    if (name == "region")
      return cmd_region(cfg, out);
    if (name == "otrate")
      return cmd_otrate(cfg, out);
    if (name == "decoy")
      return cmd_decoy(cfg, out);
    if (name == "simulate")
      return cmd_simulate(cfg, seed, out, transcript);
    err << "error: unknown command '" << name << "'\n";
    return invalid;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return invalid;
  } catch (const TruncationError& e) {
    err << "error: " << e.what() << '\n';
    return invalid;
  } catch (const DegenerateError& e) {
    err << "infeasible: " << e.what() << '\n';
    return infeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return failure;
  }
}

} // namespace nsm::cli
