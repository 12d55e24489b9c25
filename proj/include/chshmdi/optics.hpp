#ifndef CHSHMDI_OPTICS_HPP
#define CHSHMDI_OPTICS_HPP

// Channel and relay model: Alice's and Bob's pulses travel one arm each,
// interfere on a balanced beam splitter, and each output port is split by a
// polarizing beam splitter onto two threshold detectors (1H, 1V, 2H, 2V).
// A psi-minus announcement is exactly {1H, 2V} or {1V, 2H} clicking with the
// other two silent.

#include "chshmdi/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <vector>

namespace chshmdi {

/// Polarization amplitudes (H, V) of one optical mode.
using PolarizationAmplitude = Eigen::Vector2cd;

struct DetectionModel {
  double dark_count = 0.0;
  double transmittance_alice = 1.0;
  double transmittance_bob = 1.0;

  static DetectionModel from(const SystemParams& params);
};

struct SettingStatistics {
  double psi_minus_prob = 0.0;
  double psi_plus_prob = 0.0;
};

/// Eigenvector of the observable with eigenvalue +1 (bit 0) or -1 (bit 1),
/// |0> -> H, |1> -> V, first nonzero component real-positive.
PolarizationAmplitude eigenstate_amplitudes(const BasisObservable& basis, int bit);

/// Phase-randomized weak coherent inputs, averaged over the relative phase with
/// a periodic trapezoid rule on `quadrature_points` nodes.
SettingStatistics coherent_setting_statistics(const PolarizationAmplitude& amps_a,
                                              const PolarizationAmplitude& amps_b, Intensity mu,
                                              Intensity nu, const DetectionModel& det,
                                              int quadrature_points = 64);

/// Exact statistics for Fock-state inputs via the creation-operator expansion.
/// Caches the lossless detector-pattern probabilities for every (m', n') up to
/// `max_photons` per side; loss is then a binomial mixture over those.
class FockInterferometer {
 public:
  FockInterferometer(const PolarizationAmplitude& amps_a, const PolarizationAmplitude& amps_b,
                     int max_photons, double dark_count);

  int max_photons() const { return max_photons_; }
  SettingStatistics lossless(int m, int n) const;
  SettingStatistics with_loss(int m, int n, double transmittance_a, double transmittance_b) const;
  /// Sum of all occupation-pattern probabilities before detection; 1 up to round-off.
  double pattern_mass(int m, int n) const;

 private:
  std::size_t index(int m, int n) const;

  int max_photons_;
  std::vector<SettingStatistics> lossless_;
  std::vector<double> mass_;
};

inline constexpr int kMaxFockPhotons = 24;

SettingStatistics fock_setting_statistics(int m, int n, const PolarizationAmplitude& amps_a,
                                          const PolarizationAmplitude& amps_b,
                                          const DetectionModel& det);

/// Per-photon-number truth tables y(m, n, i, j, w) and the derived quantities
/// the decoy estimates aim at.
struct FockYieldTable {
  int cutoff = 0;
  /// y[tag][2 i + j](m, n)
  std::array<std::array<Eigen::MatrixXd, 4>, kNumTags> y;

  double yield(int m, int n, int i, int j, BasisTag tag) const {
    return y[index_of(tag)][static_cast<std::size_t>(2 * i + j)](m, n);
  }
  double yield_sum(int m, int n, BasisTag tag) const;
  double corr_sum(int m, int n, BasisTag tag) const;
  /// Y_mn^{ZZ} = 1/4 sum_ij y(m, n, i, j, ZZ)
  double yield_zz(int m, int n) const { return 0.25 * yield_sum(m, n, BasisTag::ZZ); }
  /// Whether the correlator has a nonzero denominator.
  bool correlator_defined(int m, int n, BasisTag tag) const { return yield_sum(m, n, tag) > 0.0; }
  /// C_mn^w, stored as 0 when undefined.
  double correlator(int m, int n, BasisTag tag) const;
  /// Error rate of the (m, n) component in a matched basis (equal raw bits count as errors).
  double error(int m, int n, BasisTag tag) const;

  double y11_zz() const { return yield_zz(1, 1); }
  double g11() const;
  double e11_xx() const { return error(1, 1, BasisTag::XX); }
};

FockYieldTable build_fock_yield_table(const ProtocolConfig& config, int cutoff);

/// Observed data for every intensity pair: the psi-minus probability of each
/// (basis combination, bit pair) setting.
class ObservedStatistics {
 public:
  using BitYields = std::array<double, 4>;  // index 2 i + j

  ObservedStatistics(std::vector<Intensity> alice, std::vector<Intensity> bob);

  const std::vector<Intensity>& alice() const { return alice_; }
  const std::vector<Intensity>& bob() const { return bob_; }
  std::size_t num_pairs() const { return alice_.size() * bob_.size(); }

  BitYields& yields(std::size_t k, std::size_t l, BasisTag tag);
  const BitYields& yields(std::size_t k, std::size_t l, BasisTag tag) const;
  double yield(std::size_t k, std::size_t l, BasisTag tag, int i, int j) const {
    return yields(k, l, tag)[static_cast<std::size_t>(2 * i + j)];
  }

  double yield_sum(std::size_t k, std::size_t l, BasisTag tag) const;
  double corr_sum(std::size_t k, std::size_t l, BasisTag tag) const;
  /// Q = 1/4 sum_ij y
  double gain(std::size_t k, std::size_t l, BasisTag tag) const { return 0.25 * yield_sum(k, l, tag); }
  /// Q E = 1/4 (y00 + y11): psi-minus with equal raw bits is an error after the bit flip.
  double error_gain(std::size_t k, std::size_t l, BasisTag tag) const;
  double error(std::size_t k, std::size_t l, BasisTag tag) const;
  bool degenerate(std::size_t k, std::size_t l, BasisTag tag) const { return yield_sum(k, l, tag) <= 0.0; }

  double gain_zz(std::size_t k, std::size_t l) const { return gain(k, l, BasisTag::ZZ); }
  double error_zz(std::size_t k, std::size_t l) const { return error(k, l, BasisTag::ZZ); }

  std::size_t signal_index_alice() const { return alice_.size() - 1; }
  std::size_t signal_index_bob() const { return bob_.size() - 1; }

 private:
  std::vector<Intensity> alice_;
  std::vector<Intensity> bob_;
  std::vector<std::array<BitYields, kNumTags>> data_;
};

ObservedStatistics observed_statistics(const ProtocolConfig& config);

}  // namespace chshmdi

#endif  // CHSHMDI_OPTICS_HPP
