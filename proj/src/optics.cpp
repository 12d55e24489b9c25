#include "chshmdi/optics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chshmdi {

namespace {

using Complex = std::complex<double>;

// Detector order used for expansions and coherent amplitudes.
enum Mode { k1H = 0, k1V = 1, k2H = 2, k2V = 3 };

double factorial(int n) {
  static const auto table = [] {
    std::array<double, 2 * kMaxFockPhotons + 1> t{};
    t[0] = 1.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<double>(i);
    return t;
  }();
  return table[static_cast<std::size_t>(n)];
}

double binomial_pmf(int k, int n, double p) {
  return factorial(n) / (factorial(k) * factorial(n - k)) * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

struct ClickProbabilities {
  std::array<double, 4> click;
  std::array<double, 4> silent;

  SettingStatistics patterns() const {
    SettingStatistics s;
    s.psi_minus_prob = click[k1H] * click[k2V] * silent[k1V] * silent[k2H] +
                       click[k1V] * click[k2H] * silent[k1H] * silent[k2V];
    s.psi_plus_prob = click[k1H] * click[k1V] * silent[k2H] * silent[k2V] +
                      click[k2H] * click[k2V] * silent[k1H] * silent[k1V];
    return s;
  }
};

// Homogeneous polynomial in the four output creation operators, stored densely
// over (k1H, k1V, k2H); the 2V exponent is implied by the degree.
class ModePolynomial {
 public:
  explicit ModePolynomial(int max_degree)
      : side_(max_degree + 1), coef_(static_cast<std::size_t>(side_ * side_ * side_), Complex(0.0)) {
    at(0, 0, 0) = 1.0;
  }

  int degree() const { return degree_; }

  void multiply(const std::array<Complex, 4>& form) {
    std::vector<Complex> next(coef_.size(), Complex(0.0));
    const int d = degree_ + 1;
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        for (int c = 0; a + b + c <= d; ++c) {
          Complex v(0.0);
          if (a > 0) v += form[k1H] * at(a - 1, b, c);
          if (b > 0) v += form[k1V] * at(a, b - 1, c);
          if (c > 0) v += form[k2H] * at(a, b, c - 1);
          if (a + b + c < d) v += form[k2V] * at(a, b, c);
          next[offset(a, b, c)] = v;
        }
      }
    }
    coef_.swap(next);
    degree_ = d;
  }

  // Visits (exponents, probability) for every occupation pattern of the
  // normalized state poly / sqrt(norm) applied to the vacuum.
  template <typename Fn>
  void for_each_pattern(double norm, Fn&& fn) const {
    const int d = degree_;
    for (int a = 0; a <= d; ++a) {
      for (int b = 0; a + b <= d; ++b) {
        for (int c = 0; a + b + c <= d; ++c) {
          const Complex v = at(a, b, c);
          if (v == Complex(0.0)) continue;
          const int e = d - a - b - c;
          const double p = std::norm(v) * factorial(a) * factorial(b) * factorial(c) * factorial(e) / norm;
          fn(std::array<int, 4>{a, b, c, e}, p);
        }
      }
    }
  }

 private:
  std::size_t offset(int a, int b, int c) const {
    return static_cast<std::size_t>((a * side_ + b) * side_ + c);
  }
  Complex& at(int a, int b, int c) { return coef_[offset(a, b, c)]; }
  const Complex& at(int a, int b, int c) const { return coef_[offset(a, b, c)]; }

  int side_;
  int degree_ = 0;
  std::vector<Complex> coef_;
};

void require_unit(const BasisObservable& basis) {
  if (!basis.is_unit()) throw std::domain_error("basis observable must have a unit Bloch vector");
  if (basis.bloch.y() != 0.0) throw std::domain_error("basis observable must lie in the x-z plane");
}

}  // namespace

DetectionModel DetectionModel::from(const SystemParams& params) {
  const double t = params.arm_transmittance();
  return {params.dark_count, t, t};
}

PolarizationAmplitude eigenstate_amplitudes(const BasisObservable& basis, int bit) {
  require_unit(basis);
  if (bit != 0 && bit != 1) throw std::domain_error("bit must be 0 or 1");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(basis.matrix());
  // Eigenvalues come sorted ascending: column 1 is +1, column 0 is -1.
  PolarizationAmplitude v = solver.eigenvectors().col(bit == 0 ? 1 : 0);
  v.normalize();
  for (Eigen::Index c = 0; c < 2; ++c) {
    if (std::abs(v(c)) <= 1e-14) v(c) = 0.0;
  }
  const Complex lead = v(0) != Complex(0.0) ? v(0) : v(1);
  v *= std::conj(lead) / std::abs(lead);
  // The leading component is real-positive by construction; drop round-off.
  (v(0) != Complex(0.0) ? v(0) : v(1)) = std::abs(lead);
  return v;
}

SettingStatistics coherent_setting_statistics(const PolarizationAmplitude& amps_a,
                                              const PolarizationAmplitude& amps_b, Intensity mu,
                                              Intensity nu, const DetectionModel& det,
                                              int quadrature_points) {
  if (quadrature_points < 16 || quadrature_points % 2 != 0) {
    throw std::domain_error("quadrature_points must be an even number >= 16");
  }
  const PolarizationAmplitude alpha = std::sqrt(mu.value() * det.transmittance_alice) * amps_a;
  const PolarizationAmplitude beta = std::sqrt(nu.value() * det.transmittance_bob) * amps_b;
  const double keep = 1.0 - det.dark_count;
  SettingStatistics sum;
  for (int k = 0; k < quadrature_points; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / quadrature_points;
    const PolarizationAmplitude b = std::polar(1.0, phi) * beta;
    const std::array<double, 4> lambda = {
        0.5 * std::norm(alpha(0) + b(0)), 0.5 * std::norm(alpha(1) + b(1)),
        0.5 * std::norm(alpha(0) - b(0)), 0.5 * std::norm(alpha(1) - b(1))};
    ClickProbabilities p;
    for (std::size_t d = 0; d < 4; ++d) {
      p.silent[d] = keep * std::exp(-lambda[d]);
      p.click[d] = 1.0 - p.silent[d];
    }
    const auto s = p.patterns();
    sum.psi_minus_prob += s.psi_minus_prob;
    sum.psi_plus_prob += s.psi_plus_prob;
  }
  sum.psi_minus_prob /= quadrature_points;
  sum.psi_plus_prob /= quadrature_points;
  return sum;
}

FockInterferometer::FockInterferometer(const PolarizationAmplitude& amps_a,
                                       const PolarizationAmplitude& amps_b, int max_photons,
                                       double dark_count)
    : max_photons_(max_photons) {
  if (max_photons < 0 || max_photons > kMaxFockPhotons) {
    throw std::domain_error("photon number outside the supported range");
  }
  const auto side = static_cast<std::size_t>(max_photons + 1);
  lossless_.resize(side * side);
  mass_.resize(side * side);

  const double r = 1.0 / std::numbers::sqrt2;
  // a -> (c + d)/sqrt2, b -> (c - d)/sqrt2 per polarization.
  const std::array<Complex, 4> form_a = {r * amps_a(0), r * amps_a(1), r * amps_a(0), r * amps_a(1)};
  const std::array<Complex, 4> form_b = {r * amps_b(0), r * amps_b(1), -r * amps_b(0), -r * amps_b(1)};

  ModePolynomial alice_part(2 * max_photons);
  for (int m = 0; m <= max_photons; ++m) {
    if (m > 0) alice_part.multiply(form_a);
    ModePolynomial poly = alice_part;
    for (int n = 0; n <= max_photons; ++n) {
      if (n > 0) poly.multiply(form_b);
      SettingStatistics stats;
      double mass = 0.0;
      poly.for_each_pattern(factorial(m) * factorial(n), [&](const std::array<int, 4>& k, double p) {
        mass += p;
        ClickProbabilities c;
        for (std::size_t d = 0; d < 4; ++d) {
          c.click[d] = k[d] > 0 ? 1.0 : dark_count;
          c.silent[d] = k[d] > 0 ? 0.0 : 1.0 - dark_count;
        }
        const auto s = c.patterns();
        stats.psi_minus_prob += p * s.psi_minus_prob;
        stats.psi_plus_prob += p * s.psi_plus_prob;
      });
      lossless_[index(m, n)] = stats;
      mass_[index(m, n)] = mass;
    }
  }
}

std::size_t FockInterferometer::index(int m, int n) const {
  if (m < 0 || n < 0) throw std::domain_error("photon numbers must be non-negative");
  if (m > max_photons_ || n > max_photons_) throw std::out_of_range("photon number above the cached range");
  return static_cast<std::size_t>(m * (max_photons_ + 1) + n);
}

SettingStatistics FockInterferometer::lossless(int m, int n) const { return lossless_[index(m, n)]; }

double FockInterferometer::pattern_mass(int m, int n) const { return mass_[index(m, n)]; }

SettingStatistics FockInterferometer::with_loss(int m, int n, double transmittance_a,
                                                double transmittance_b) const {
  index(m, n);
  SettingStatistics out;
  for (int ms = 0; ms <= m; ++ms) {
    const double pa = binomial_pmf(ms, m, transmittance_a);
    if (pa == 0.0) continue;
    for (int ns = 0; ns <= n; ++ns) {
      const double w = pa * binomial_pmf(ns, n, transmittance_b);
      if (w == 0.0) continue;
      const auto& s = lossless_[index(ms, ns)];
      out.psi_minus_prob += w * s.psi_minus_prob;
      out.psi_plus_prob += w * s.psi_plus_prob;
    }
  }
  return out;
}

SettingStatistics fock_setting_statistics(int m, int n, const PolarizationAmplitude& amps_a,
                                          const PolarizationAmplitude& amps_b,
                                          const DetectionModel& det) {
  if (m < 0 || n < 0) throw std::domain_error("photon numbers must be non-negative");
  FockInterferometer model(amps_a, amps_b, std::max(m, n), det.dark_count);
  return model.with_loss(m, n, det.transmittance_alice, det.transmittance_bob);
}

double FockYieldTable::yield_sum(int m, int n, BasisTag tag) const {
  double s = 0.0;
  for (const auto& bits : y[index_of(tag)]) s += bits(m, n);
  return s;
}

double FockYieldTable::corr_sum(int m, int n, BasisTag tag) const {
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) s += correlator_sign(i, j) * yield(m, n, i, j, tag);
  }
  return s;
}

double FockYieldTable::correlator(int m, int n, BasisTag tag) const {
  const double den = yield_sum(m, n, tag);
  return den > 0.0 ? corr_sum(m, n, tag) / den : 0.0;
}

double FockYieldTable::error(int m, int n, BasisTag tag) const {
  const double den = yield_sum(m, n, tag);
  if (!(den > 0.0)) return 0.5;
  return (yield(m, n, 0, 0, tag) + yield(m, n, 1, 1, tag)) / den;
}

double FockYieldTable::g11() const {
  return correlator(1, 1, BasisTag::QS) + correlator(1, 1, BasisTag::RS) +
         correlator(1, 1, BasisTag::RT) - correlator(1, 1, BasisTag::QT);
}

FockYieldTable build_fock_yield_table(const ProtocolConfig& config, int cutoff) {
  if (cutoff < 1) throw std::domain_error("Fock table cutoff must be at least 1");
  config.system.validate();
  const auto det = DetectionModel::from(config.system);
  FockYieldTable table;
  table.cutoff = cutoff;
  for (auto tag : kAllTags) {
    const auto combo = combination(tag);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        FockInterferometer model(eigenstate_amplitudes(combo.alice, i),
                                 eigenstate_amplitudes(combo.bob, j), cutoff, det.dark_count);
        Eigen::MatrixXd grid(cutoff + 1, cutoff + 1);
        for (int m = 0; m <= cutoff; ++m) {
          for (int n = 0; n <= cutoff; ++n) {
            grid(m, n) = model.with_loss(m, n, det.transmittance_alice, det.transmittance_bob).psi_minus_prob;
          }
        }
        table.y[index_of(tag)][static_cast<std::size_t>(2 * i + j)] = std::move(grid);
      }
    }
  }
  return table;
}

ObservedStatistics::ObservedStatistics(std::vector<Intensity> alice, std::vector<Intensity> bob)
    : alice_(std::move(alice)), bob_(std::move(bob)), data_(alice_.size() * bob_.size()) {
  for (auto& entry : data_) {
    for (auto& bits : entry) bits.fill(0.0);
  }
}

ObservedStatistics::BitYields& ObservedStatistics::yields(std::size_t k, std::size_t l, BasisTag tag) {
  return data_.at(k * bob_.size() + l)[index_of(tag)];
}

const ObservedStatistics::BitYields& ObservedStatistics::yields(std::size_t k, std::size_t l,
                                                                BasisTag tag) const {
  return data_.at(k * bob_.size() + l)[index_of(tag)];
}

double ObservedStatistics::yield_sum(std::size_t k, std::size_t l, BasisTag tag) const {
  const auto& y = yields(k, l, tag);
  return y[0] + y[1] + y[2] + y[3];
}

double ObservedStatistics::corr_sum(std::size_t k, std::size_t l, BasisTag tag) const {
  const auto& y = yields(k, l, tag);
  return y[0] - y[1] - y[2] + y[3];
}

double ObservedStatistics::error_gain(std::size_t k, std::size_t l, BasisTag tag) const {
  const auto& y = yields(k, l, tag);
  return 0.25 * (y[0] + y[3]);
}

double ObservedStatistics::error(std::size_t k, std::size_t l, BasisTag tag) const {
  const double total = yield_sum(k, l, tag);
  if (!(total > 0.0)) return 0.5;
  const auto& y = yields(k, l, tag);
  return (y[0] + y[3]) / total;
}

ObservedStatistics observed_statistics(const ProtocolConfig& config) {
  config.validate();
  const auto det = DetectionModel::from(config.system);
  ObservedStatistics obs(config.alice.all(), config.bob.all());
  for (auto tag : kAllTags) {
    const auto combo = combination(tag);
    std::array<PolarizationAmplitude, 2> a = {eigenstate_amplitudes(combo.alice, 0),
                                              eigenstate_amplitudes(combo.alice, 1)};
    std::array<PolarizationAmplitude, 2> b = {eigenstate_amplitudes(combo.bob, 0),
                                              eigenstate_amplitudes(combo.bob, 1)};
    for (std::size_t k = 0; k < obs.alice().size(); ++k) {
      for (std::size_t l = 0; l < obs.bob().size(); ++l) {
        auto& y = obs.yields(k, l, tag);
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            y[static_cast<std::size_t>(2 * i + j)] =
                coherent_setting_statistics(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)],
                                            obs.alice()[k], obs.bob()[l], det, config.phase_nodes)
                    .psi_minus_prob;
          }
        }
      }
    }
  }
  return obs;
}

}  // namespace chshmdi
