#include "chshmdi/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace chshmdi {

Intensity::Intensity(double value) : value_(value) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::domain_error("intensity must be a finite non-negative number");
  }
}

void IntensitySet::validate() const {
  for (std::size_t i = 1; i < decoys.size(); ++i) {
    if (!(decoys[i - 1] < decoys[i])) {
      throw ConfigError("decoy intensities must be strictly increasing");
    }
  }
  if (!decoys.empty() && !(decoys.back() < signal)) {
    std::ostringstream msg;
    msg << "signal intensity " << signal.value() << " must exceed every decoy intensity";
    throw ConfigError(msg.str());
  }
}

std::vector<Intensity> IntensitySet::all() const {
  std::vector<Intensity> out(decoys);
  out.push_back(signal);
  return out;
}

BasisObservable BasisObservable::S() {
  return {Eigen::Vector3d(-1.0, 0.0, -1.0) / std::numbers::sqrt2};
}

BasisObservable BasisObservable::T() {
  return {Eigen::Vector3d(-1.0, 0.0, 1.0) / std::numbers::sqrt2};
}

Eigen::Matrix2cd BasisObservable::matrix() const {
  using C = std::complex<double>;
  Eigen::Matrix2cd m;
  m << C(bloch.z(), 0.0), C(bloch.x(), -bloch.y()),
       C(bloch.x(), bloch.y()), C(-bloch.z(), 0.0);
  return m;
}

std::string_view to_string(BasisTag tag) {
  switch (tag) {
    case BasisTag::QS: return "QS";
    case BasisTag::RS: return "RS";
    case BasisTag::RT: return "RT";
    case BasisTag::QT: return "QT";
    case BasisTag::ZZ: return "ZZ";
    case BasisTag::XX: return "XX";
  }
  return "?";
}

BasisCombination combination(BasisTag tag) {
  const auto Q = BasisObservable::Z();
  const auto R = BasisObservable::X();
  switch (tag) {
    case BasisTag::QS: return {tag, Q, BasisObservable::S()};
    case BasisTag::RS: return {tag, R, BasisObservable::S()};
    case BasisTag::RT: return {tag, R, BasisObservable::T()};
    case BasisTag::QT: return {tag, Q, BasisObservable::T()};
    case BasisTag::ZZ: return {tag, Q, Q};
    case BasisTag::XX: return {tag, R, R};
  }
  throw std::logic_error("unknown basis tag");
}

void SystemParams::validate() const {
  if (!(dark_count >= 0.0 && dark_count < 1.0)) {
    throw ConfigError("dark_count must lie in [0, 1)");
  }
  if (!(det_efficiency > 0.0 && det_efficiency <= 1.0)) {
    throw ConfigError("det_efficiency must lie in (0, 1]");
  }
  if (!(fiber_loss_db_km >= 0.0) || !std::isfinite(fiber_loss_db_km)) {
    throw ConfigError("fiber_loss_db_km must be non-negative");
  }
  if (!(recon_efficiency >= 1.0) || !std::isfinite(recon_efficiency)) {
    throw ConfigError("reconciliation efficiency f must be at least 1");
  }
  if (!(distance_km >= 0.0) || !std::isfinite(distance_km)) {
    throw ConfigError("distance must be non-negative");
  }
}

double SystemParams::arm_transmittance() const {
  return det_efficiency * std::pow(10.0, -fiber_loss_db_km * (0.5 * distance_km) / 10.0);
}

void ProtocolConfig::validate() const {
  alice.validate();
  bob.validate();
  system.validate();
  if (phase_nodes < 16 || phase_nodes % 2 != 0) {
    throw ConfigError("phase_nodes must be an even number >= 16");
  }
}

ProtocolConfig ProtocolConfig::at_distance(double km) const {
  ProtocolConfig c = *this;
  c.system.distance_km = km;
  return c;
}

ProtocolConfig ProtocolConfig::with_signal(double mu) const {
  ProtocolConfig c = *this;
  c.alice.signal = Intensity(mu);
  c.bob.signal = Intensity(mu);
  return c;
}

ProtocolConfig symmetric_config(const std::vector<double>& decoys, double signal,
                                const SystemParams& system) {
  ProtocolConfig c;
  for (double d : decoys) c.alice.decoys.emplace_back(d);
  c.alice.signal = Intensity(signal);
  c.bob = c.alice;
  c.system = system;
  return c;
}

double poisson_pmf(Intensity intensity, int n) {
  if (n < 0) throw std::domain_error("photon number must be non-negative");
  const double mu = intensity.value();
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  if (n > 20) {
    return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
  }
  double term = std::exp(-mu);
  for (int k = 1; k <= n; ++k) term *= mu / k;
  return term;
}

namespace {

// sum_{n > cutoff} P_n(mu), accumulated upward so tiny tails keep full relative precision.
double single_tail(double mu, int cutoff) {
  if (mu == 0.0) return 0.0;
  double term = poisson_pmf(Intensity(mu), cutoff + 1);
  double sum = 0.0;
  for (int n = cutoff + 1; n < cutoff + 2000; ++n) {
    sum += term;
    if (term < 1e-300 || (n > mu && term < sum * 1e-18)) break;
    term *= mu / (n + 1);
  }
  // For large mu the upward series is dominated by terms past the mode; fall back to the
  // complement, which is then accurate.
  if (mu > cutoff) {
    double head = 0.0;
    for (int n = 0; n <= cutoff; ++n) head += poisson_pmf(Intensity(mu), n);
    return std::max(0.0, 1.0 - head);
  }
  return sum;
}

}  // namespace

double poisson_tail(Intensity a, Intensity b, int cutoff) {
  if (cutoff < 0) throw std::domain_error("cutoff must be non-negative");
  const double ta = single_tail(a.value(), cutoff);
  const double tb = single_tail(b.value(), cutoff);
  return ta + tb - ta * tb;
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary entropy argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

}  // namespace chshmdi
