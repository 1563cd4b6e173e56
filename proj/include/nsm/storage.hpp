#pragma once

namespace nsm {

// Entropy function of a memory channel that satisfies a strong converse.
class StrongConverseChannel {
public:
  virtual ~StrongConverseChannel() = default;
  // Classical capacity in bits per channel use.
  virtual double capacity() const = 0;
  // Exponent of the success probability for sending at `rate` bits per use.
  virtual double gamma(double rate) const = 0;
};

double depolarizing_capacity(int d, double r);

struct GammaOptions {
  double alpha_max = 1e6;
  int grid_points = 512;
};

// The d-dimensional depolarizing channel rho -> r rho + (1 - r) I/d.
class DepolarizingChannel final : public StrongConverseChannel {
public:
  DepolarizingChannel(int d, double r, GammaOptions opts = {});

  double capacity() const override { return capacity_; }
  double gamma(double rate) const override;

  // Objective maximized by gamma, at fixed alpha > 1.
  double converse_objective(double rate, double alpha) const;
  // Renyi entropy (in bits) of the output eigenvalue distribution.
  double renyi_entropy(double alpha) const;

  int dimension() const { return d_; }
  double r() const { return r_; }

private:
  int d_;
  double r_;
  GammaOptions opts_;
  double capacity_;
};

double strong_converse_gamma(int d, double r, double rate, GammaOptions opts = {});

// Memory available to a dishonest receiver: nu uses of the channel per stored qubit.
struct NoisyStorage {
  int d = 2;
  double r = 0.0;
  double nu = 1.0;

  void validate() const;
  DepolarizingChannel channel() const { return DepolarizingChannel(d, r); }
};

} // namespace nsm
