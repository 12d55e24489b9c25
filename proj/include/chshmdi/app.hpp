#ifndef CHSHMDI_APP_HPP
#define CHSHMDI_APP_HPP

// The two subcommands of the command-line tool, separated from argument
// parsing so they can be driven from tests.

#include "chshmdi/config.hpp"

#include <iosfwd>
#include <optional>

namespace chshmdi {

/// Runs the distance scan, writes the CSV to config.out and a summary to
/// `out`. With `refine_step` the cutoff is resolved to that many km. Returns
/// the process exit status; errors go to `err`.
int run_scan(const RunConfig& config, std::ostream& out, std::ostream& err,
             std::optional<double> refine_step = std::nullopt);

/// Bound report at one distance next to the photon-number truth. The signal
/// intensity is optimized unless given.
int run_diagnostics(const RunConfig& config, double distance_km, std::ostream& out, std::ostream& err,
                    std::optional<double> signal = std::nullopt);

struct MixtureResidual {
  BasisTag tag = BasisTag::ZZ;
  /// Largest |coherent - truncated photon-number mixture| over intensity pairs and bit settings.
  double max_residual = 0.0;
  /// Largest amount by which a residual exceeds its pair's Poisson tail;
  /// round-off level when the mixture identity holds.
  double max_excess = -1.0;
};

/// Checks the observed statistics against the truth table mixed with Poisson weights.
std::array<MixtureResidual, kNumTags> mixture_residuals(const ProtocolConfig& config, int cutoff);

}  // namespace chshmdi

#endif  // CHSHMDI_APP_HPP
