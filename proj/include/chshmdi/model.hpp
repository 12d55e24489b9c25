#ifndef CHSHMDI_MODEL_HPP
#define CHSHMDI_MODEL_HPP

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chshmdi {

/// Raised when a configuration violates a precondition of the pipeline
/// (too few intensities, bad system parameters, malformed config text).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mean photon number per pulse. Zero is the vacuum decoy.
class Intensity {
 public:
  Intensity() = default;
  explicit Intensity(double value);

  double value() const { return value_; }
  bool is_vacuum() const { return value_ == 0.0; }

  friend bool operator==(const Intensity&, const Intensity&) = default;
  friend auto operator<=>(const Intensity&, const Intensity&) = default;

 private:
  double value_ = 0.0;
};

/// Decoy intensities (strictly increasing) followed by one signal intensity.
struct IntensitySet {
  std::vector<Intensity> decoys;
  Intensity signal;

  /// Throws ConfigError unless decoys are strictly increasing and below the signal.
  void validate() const;
  /// Decoys then signal; the index into this list is the intensity index k (or l).
  std::vector<Intensity> all() const;
  std::size_t size() const { return decoys.size() + 1; }

  friend bool operator==(const IntensitySet&, const IntensitySet&) = default;
};

/// A qubit observable n.sigma given by its Bloch direction n.
struct BasisObservable {
  Eigen::Vector3d bloch;

  static BasisObservable Z() { return {Eigen::Vector3d(0.0, 0.0, 1.0)}; }
  static BasisObservable X() { return {Eigen::Vector3d(1.0, 0.0, 0.0)}; }
  /// (-Z - X)/sqrt(2)
  static BasisObservable S();
  /// (Z - X)/sqrt(2)
  static BasisObservable T();

  bool is_unit(double tol = 1e-12) const { return std::abs(bloch.norm() - 1.0) <= tol; }
  /// 2x2 Hermitian matrix x X + y Y + z Z.
  Eigen::Matrix2cd matrix() const;
};

/// Basis combinations. QS, RS, RT, QT feed the CHSH estimate, ZZ the key
/// and yield estimate, XX only the standard MDI baseline.
enum class BasisTag { QS, RS, RT, QT, ZZ, XX };

inline constexpr std::array<BasisTag, 6> kAllTags = {BasisTag::QS, BasisTag::RS, BasisTag::RT,
                                                     BasisTag::QT, BasisTag::ZZ, BasisTag::XX};
inline constexpr std::array<BasisTag, 4> kChshTags = {BasisTag::QS, BasisTag::RS, BasisTag::RT,
                                                      BasisTag::QT};
inline constexpr std::size_t kNumTags = kAllTags.size();

constexpr std::size_t index_of(BasisTag tag) { return static_cast<std::size_t>(tag); }
std::string_view to_string(BasisTag tag);

struct BasisCombination {
  BasisTag tag;
  BasisObservable alice;
  BasisObservable bob;
};

/// Q=Z, R=X on Alice's side; S, T on Bob's; ZZ and XX pair equal bases.
BasisCombination combination(BasisTag tag);

/// a_ij = (-1)^(i xor j).
constexpr int correlator_sign(int i, int j) { return ((i ^ j) & 1) ? -1 : 1; }

struct SystemParams {
  double dark_count = 6e-6;
  double det_efficiency = 0.145;
  double fiber_loss_db_km = 0.2;
  double recon_efficiency = 1.16;
  /// Alice-to-Bob distance in km; the relay sits at the midpoint.
  double distance_km = 0.0;

  void validate() const;
  /// Transmittance of one arm including detector efficiency.
  double arm_transmittance() const;

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct ProtocolConfig {
  IntensitySet alice;
  IntensitySet bob;
  SystemParams system;
  int phase_nodes = 64;

  void validate() const;
  ProtocolConfig at_distance(double km) const;
  ProtocolConfig with_signal(double mu) const;
};

/// Symmetric intensity set used throughout the examples: decoys shared by both parties.
ProtocolConfig symmetric_config(const std::vector<double>& decoys, double signal,
                                const SystemParams& system = {});

double poisson_pmf(Intensity intensity, int n);
inline double poisson_pmf(double mu, int n) { return poisson_pmf(Intensity(mu), n); }

/// 1 - sum_{m,n <= cutoff} P_m(mu) P_n(nu).
double poisson_tail(Intensity a, Intensity b, int cutoff);
inline double poisson_tail(double mu, double nu, int cutoff) {
  return poisson_tail(Intensity(mu), Intensity(nu), cutoff);
}

/// h(x) in bits, with h(0) = h(1) = 0.
double binary_entropy(double x);

}  // namespace chshmdi

#endif  // CHSHMDI_MODEL_HPP
