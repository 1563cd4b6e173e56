#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "nsm/error.hpp"
#include "nsm/security.hpp"
#include "nsm/sources.hpp"
#include "nsm/storage.hpp"

namespace nsm::cli {

enum ExitCode : int { ok = 0, failure = 1, invalid = 2, infeasible = 3 };

class ConfigError : public DomainError {
public:
  ConfigError(int line, const std::string& what)
      : DomainError("line " + std::to_string(line) + ": " + what), line_(line)
  {
  }
  int line() const { return line_; }

private:
  int line_;
};

struct ScanAxis {
  std::string name;
  double min = 0;
  double max = 0;
  int steps = 1;
  bool log = false;

  double value(int i) const;
};

struct Config {
  SourceModel source = SourceModel::wcp(0.3);
  std::optional<double> mu_hat;   // decoy intensity; enables the decoy estimate
  DetectorModel detector{0.7, 0.85e-6, 0.033};
  NoisyStorage storage{2, 0.9, 0.25};
  SecurityConfig security;

  struct Protocol {
    std::string pipeline = "frot";   // wsee, decoy, frot or ot
    std::uint64_t rounds = 10000;
    int runs = 1;
    std::optional<int> beta;         // row length; otrate defaults to the smallest allowed
    double omega = 2;
    int ell = 16;
    std::optional<int> t;
    std::optional<int> code_radius;  // random lookup code instead of the default family
    double code_overhead = 1.2;
    std::optional<double> lambda;    // otrate overrides
    std::optional<double> p_err;
    std::optional<double> wsee_fraction;
  } protocol;

  struct Scan {
    ScanAxis axis1{"eta", 0.05, 1.0, 20};
    ScanAxis axis2{"mu", 0.05, 1.0, 20};
    double rounds_min = 1e6;
    double rounds_max = 1e12;
    int rounds_points = 13;
  } scan;

  void validate() const;
};

// `key = value` lines grouped under [source], [detector], [storage],
// [security], [protocol] and [scan]. '#' starts a comment.
Config parse_config(std::istream& in);
Config load_config(const std::string& path);

// Sets a scalar physics parameter by name (eta, mu, mu_hat, p_dark, e_det,
// r, nu, d, delta, M, omega).
void set_parameter(Config& cfg, const std::string& name, double value);
std::string parameter_unit(const std::string& name);

// Fixed 9-significant-digit rendering used for every number printed.
std::string format_number(double v);

int cmd_params(const Config& cfg, std::ostream& out);
int cmd_lambda(const Config& cfg, std::ostream& out);
int cmd_region(const Config& cfg, std::ostream& out, unsigned threads = 0);
int cmd_otrate(const Config& cfg, std::ostream& out);
int cmd_decoy(const Config& cfg, std::ostream& out);
int cmd_simulate(const Config& cfg, std::uint64_t seed, std::ostream& summary, std::ostream* transcript);

// Runs one subcommand and maps library exceptions to exit codes.
int run_command(const std::string& name, const Config& cfg, std::uint64_t seed, std::ostream& out,
                std::ostream& err, std::ostream* transcript = nullptr);

} // namespace nsm::cli
