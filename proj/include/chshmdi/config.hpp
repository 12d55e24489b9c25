#ifndef CHSHMDI_CONFIG_HPP
#define CHSHMDI_CONFIG_HPP

// Flat key=value run configuration for the command-line front end.
//
//   # 5-intensity CHSH scan
//   protocol = chsh-mdi
//   decoys = 0,0.01,0.02,0.03
//   dark_count = 6e-6
//   det_efficiency = 0.145
//   fiber_loss_db_km = 0.2
//   f = 1.16
//   distances = 0:150:5
//   out = chsh5.csv
//
// Optional keys: signal_grid (default 0.01:1:0.01), N (pulse pairs per
// setting; absent means asymptotic), cutoff (7), phase_nodes (64).

#include "chshmdi/keyrate.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chshmdi {

/// start:stop:step, stop included.
struct DistanceRange {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> values() const { return arithmetic_range(start, stop, step); }
  friend bool operator==(const DistanceRange&, const DistanceRange&) = default;
};

struct RunConfig {
  Protocol protocol = Protocol::ChshMdi;
  /// Shared by both parties, strictly increasing, all below the signal grid maximum.
  std::vector<double> decoys;
  SignalGrid signal_grid;
  SystemParams system;
  DistanceRange distances;
  std::optional<double> pulses;
  int cutoff = 7;
  int phase_nodes = 64;
  std::string out;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Symmetric configuration at the given signal intensity and zero distance.
  ProtocolConfig protocol_config(double signal) const;
  RateOptions rate_options() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string_view config_name(Protocol protocol);

/// Parses and validates. Errors are ConfigError messages of the form
/// "line 3: decoys: ..." (or "missing key 'out'").
RunConfig parse_config(std::string_view text);

/// Canonical text; parse_config(render(c)) == c for every valid c.
std::string render(const RunConfig& config);

}  // namespace chshmdi

#endif  // CHSHMDI_CONFIG_HPP
