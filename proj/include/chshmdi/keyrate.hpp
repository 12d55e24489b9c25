#ifndef CHSHMDI_KEYRATE_HPP
#define CHSHMDI_KEYRATE_HPP

// Secret key rates, signal-intensity optimization and distance scans.

#include "chshmdi/bounds.hpp"
#include "chshmdi/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chshmdi {

/// ChshMdi and Mdi estimate the single-photon quantities from decoy data.
/// The oracle variants read them from the photon-number truth table instead,
/// which is the infinite-decoy limit.
enum class Protocol { ChshMdi, Mdi, ChshMdiOracle, MdiOracle };

std::string_view to_string(Protocol protocol);
bool is_chsh(Protocol protocol);
bool is_oracle(Protocol protocol);

/// 1 - log2(1 + sqrt(max(0, 2 - g^2 / 4))).
double privacy_factor(double g11);

/// R = p11 y11 privacy_factor(g11) - gain f h(error), not clamped.
double chsh_key_rate(double p11, double y11, double g11, double gain, double error, double f);

/// R = p11 y11 (1 - h(e11)) - gain f h(error), not clamped.
double mdi_key_rate(double p11, double y11, double e11, double gain, double error, double f);

/// Baseline rate from decoy estimates of Y11 (ZZ) and e11 (XX), not clamped.
double mdi_key_rate(const IntervalObservation& observed, const ObservedStatistics& point,
                    const TruncationPolicy& policy, double f);

struct KeyRatePoint {
  double distance_km = 0.0;
  double mu_s = 0.0;
  double y11_lower = 0.0;
  /// NaN for the MDI baseline.
  double g11_lower = std::numeric_limits<double>::quiet_NaN();
  /// Phase-error bound of the MDI baseline; NaN for CHSH.
  double e11_upper = std::numeric_limits<double>::quiet_NaN();
  double gain = 0.0;
  double error = 0.0;
  double raw_rate = 0.0;
  /// max(raw_rate, 0)
  double rate = 0.0;
  std::string protocol;
  /// Pulse count of a finite-size run; empty when asymptotic.
  std::optional<double> pulses;

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// Signal intensities searched: min, min + step, ..., max (inclusive).
struct SignalGrid {
  double min = 0.01;
  double max = 1.00;
  double step = 0.01;

  void validate() const;
  std::vector<double> values() const;

  friend bool operator==(const SignalGrid&, const SignalGrid&) = default;
};

struct RateOptions {
  Protocol protocol = Protocol::ChshMdi;
  TruncationPolicy policy;
  SignalGrid grid;
  /// Pulse pairs per (intensity pair, basis combination) setting; empty means asymptotic.
  std::optional<double> pulses;
};

/// Protocol label written to CSV: CHSH-MDI, MDI, CHSH-MDI-finite, ...
std::string protocol_label(const RateOptions& options);

/// Full pipeline at the configuration's own signal intensity and distance.
KeyRatePoint evaluate_point(const ProtocolConfig& config, const RateOptions& options);

/// Grid search over mu_s = nu_s, keeping the decoys of `config`. Grid values
/// not above the largest decoy are skipped. Returns the argmax of the clamped
/// rate, ties to the smaller intensity; if no grid point gives a positive
/// rate the smallest admissible intensity is returned with rate 0. The full
/// bound pipeline only runs where the yield bound alone leaves room to win.
KeyRatePoint optimize_signal(const ProtocolConfig& config, const RateOptions& options, double distance_km);

struct ScanMetadata {
  std::string protocol;
  std::vector<double> alice;
  std::vector<double> bob;
  SystemParams system;
  int cutoff = 7;
  int phase_nodes = 64;
  SignalGrid grid;
  std::optional<double> pulses;
  std::string formula;
};

struct ScanResult {
  ScanMetadata metadata;
  std::vector<KeyRatePoint> points;

  /// Largest scanned distance with a positive rate.
  std::optional<double> secure_distance() const;
  /// Point with the largest rate, or nullptr when the scan is empty.
  const KeyRatePoint* peak() const;
};

/// Distances must be non-empty and strictly increasing. Points are evaluated
/// in parallel (see worker_count) and assembled in distance order.
ScanResult distance_scan(const ProtocolConfig& config, const RateOptions& options,
                         const std::vector<double>& distances);

/// Inserts points every `step` km between the secure distance and the next
/// scanned distance so the cutoff is resolved to `step`.
void refine_cutoff(ScanResult& scan, const ProtocolConfig& config, const RateOptions& options, double step);

/// Inclusive arithmetic range start, start + step, ..., stop; values are
/// rounded to 1e-9 so decimal steps print cleanly.
std::vector<double> arithmetic_range(double start, double stop, double step);

/// Thread count for scans: CHSHMDI_THREADS if set and positive, else the
/// hardware concurrency.
int worker_count();

void write_csv(std::ostream& os, const ScanResult& scan);
/// Reads the rows written by write_csv (metadata comments are skipped) and
/// validates each point.
std::vector<KeyRatePoint> read_csv(std::istream& is);

}  // namespace chshmdi

#endif  // CHSHMDI_KEYRATE_HPP
