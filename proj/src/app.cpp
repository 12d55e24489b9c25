#include "chshmdi/app.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace chshmdi {

namespace {

void summary(std::ostream& os, const RunConfig& config, const ScanResult& scan) {
  os << "# configuration\n" << render(config);
  os << "# result\n";
  os << "points = " << scan.points.size() << "\n";
  if (const auto sd = scan.secure_distance()) {
    os << "secure_distance_km = " << *sd << "\n";
  } else {
    os << "secure_distance_km = none\n";
  }
  if (const auto* peak = scan.peak()) {
    os << "peak_rate = " << std::scientific << std::setprecision(6) << peak->rate << std::defaultfloat
       << " at " << peak->distance_km << " km (mu_s = " << peak->mu_s << ")\n";
  }
  os << "csv = " << config.out << "\n";
}

}  // namespace

std::array<MixtureResidual, kNumTags> mixture_residuals(const ProtocolConfig& config, int cutoff) {
  const auto observed = observed_statistics(config);
  const auto table = build_fock_yield_table(config, cutoff);
  std::array<MixtureResidual, kNumTags> out;
  for (auto tag : kAllTags) {
    auto& r = out[index_of(tag)];
    r.tag = tag;
    for (std::size_t k = 0; k < observed.alice().size(); ++k) {
      for (std::size_t l = 0; l < observed.bob().size(); ++l) {
        const auto mu = observed.alice()[k];
        const auto nu = observed.bob()[l];
        const double tail = poisson_tail(mu, nu, cutoff);
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            double mixed = 0.0;
            for (int m = 0; m <= cutoff; ++m) {
              for (int n = 0; n <= cutoff; ++n) {
                mixed += poisson_pmf(mu, m) * poisson_pmf(nu, n) * table.yield(m, n, i, j, tag);
              }
            }
            const double residual = std::abs(observed.yield(k, l, tag, i, j) - mixed);
            r.max_residual = std::max(r.max_residual, residual);
            r.max_excess = std::max(r.max_excess, residual - tail);
          }
        }
      }
    }
  }
  return out;
}

int run_scan(const RunConfig& config, std::ostream& out, std::ostream& err, std::optional<double> refine_step) {
  try {
    config.validate();
    std::ofstream file(config.out, std::ios::binary);
    if (!file) {
      err << "error: cannot open output file '" << config.out << "'\n";
      return 1;
    }
    const auto base = config.protocol_config(config.signal_grid.max);
    const auto options = config.rate_options();
    auto scan = distance_scan(base, options, config.distances.values());
    if (refine_step) refine_cutoff(scan, base, options, *refine_step);
    write_csv(file, scan);
    file.close();
    if (!file) {
      err << "error: failed writing '" << config.out << "'\n";
      return 1;
    }
    summary(out, config, scan);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_diagnostics(const RunConfig& config, double distance_km, std::ostream& out, std::ostream& err,
                    std::optional<double> signal) {
  try {
    config.validate();
    if (!(distance_km >= 0.0) || !std::isfinite(distance_km)) throw ConfigError("distance must be non-negative");
    const auto options = config.rate_options();
    double mu = 0.0;
    if (signal) {
      mu = *signal;
    } else {
      mu = optimize_signal(config.protocol_config(config.signal_grid.max), options, distance_km).mu_s;
    }
    const auto point_config = config.protocol_config(mu).at_distance(distance_km);
    point_config.validate();
    const auto observed = observed_statistics(point_config);
    const auto intervals = options.pulses ? apply_finite_size(observed, *options.pulses) : to_intervals(observed);
    const auto report = estimate_bounds(intervals, options.policy);
    const auto e11 = upper_bound_e11(intervals, options.policy);
    const auto table = build_fock_yield_table(point_config, 1);
    const auto point = evaluate_point(point_config, options);

    out << "# configuration\n" << render(config);
    out << "# point\n";
    out << "distance_km = " << distance_km << "\nmu_s = " << mu << "\n";
    out << "N = " << (options.pulses ? std::to_string(*options.pulses) : std::string("inf")) << "\n";
    out << std::scientific << std::setprecision(10);
    out << "gain_zz = " << point.gain << "\nerror_zz = " << point.error << "\n";
    out << "rate (" << point.protocol << ") = " << point.rate << "\n";
    out << "# bounds\n";
    report.print(out);
    out << "e11_upper = " << e11.e11_upper << "  (Y11 XX lower " << e11.y11_xx_lower << ", error yield upper "
        << e11.error_yield_upper << ")\n";
    out << "# truth\n";
    out << "Y11 ZZ: oracle " << table.y11_zz() << "  bound " << report.y11_lower
        << (report.y11_lower <= table.y11_zz() ? "  ok" : "  VIOLATED") << "\n";
    out << "g11:    oracle " << table.g11() << "  bound " << report.g11_lower
        << (report.g11_lower <= table.g11() ? "  ok" : "  VIOLATED") << "\n";
    for (const auto& t : report.terms) {
      out << "  C11^" << to_string(t.tag) << ": oracle " << table.correlator(1, 1, t.tag) << "  bound " << t.ratio
          << "\n";
    }
    out << "e11 XX: oracle " << table.e11_xx() << "  bound " << e11.e11_upper << "\n";
    out << "# mixture residuals (cutoff " << config.cutoff << ")\n";
    for (const auto& r : mixture_residuals(point_config, config.cutoff)) {
      out << "  " << to_string(r.tag) << ": max residual " << r.max_residual << "  max residual - tail "
          << r.max_excess << "\n";
    }
    out << "all_lp_optimal = " << (report.all_optimal() ? "yes" : "no") << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace chshmdi
