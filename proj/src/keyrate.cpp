#include "chshmdi/keyrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace chshmdi {

namespace {

void require_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in [0, 1]");
  }
}

double leak(double gain, double error, double f) {
  require_unit(gain, "gain");
  require_unit(error, "error rate");
  if (!(f >= 1.0)) throw std::domain_error("reconciliation efficiency must be at least 1");
  return gain * f * binary_entropy(error);
}

double single_photon_probability(const ProtocolConfig& config) {
  return poisson_pmf(config.alice.signal, 1) * poisson_pmf(config.bob.signal, 1);
}

std::vector<double> values_of(const std::vector<Intensity>& v) {
  std::vector<double> out;
  for (auto i : v) out.push_back(i.value());
  return out;
}

// The quantities a rate needs before the expensive CHSH programs.
struct Prelude {
  ObservedStatistics observed;
  std::optional<IntervalObservation> intervals;
  double p11 = 0.0;
  double gain = 0.0;
  double error = 0.0;
  double f = 1.0;
  double y11 = 0.0;
  FockYieldTable table;
  /// Upper bound on the privacy factor the bounds can certify, from the truth table.
  double factor_ceiling = 1.0;
};

Prelude prelude(const ProtocolConfig& config, const RateOptions& options) {
  config.validate();
  if (is_oracle(options.protocol) && options.pulses) {
    throw ConfigError("oracle protocols have no finite-size variant");
  }
  Prelude p{observed_statistics(config), std::nullopt, 0.0, 0.0, 0.0, 0.0, 0.0, build_fock_yield_table(config, 1), 1.0};
  const auto ks = p.observed.signal_index_alice();
  const auto ls = p.observed.signal_index_bob();
  p.p11 = single_photon_probability(config);
  p.gain = p.observed.gain_zz(ks, ls);
  p.error = p.observed.error_zz(ks, ls);
  p.f = config.system.recon_efficiency;
  // Sound bounds never beat the truth; the margin absorbs solver tolerance.
  constexpr double kMargin = 1e-6;
  if (is_chsh(options.protocol)) {
    p.factor_ceiling = privacy_factor(std::clamp(std::abs(p.table.g11()) + kMargin, 0.0, 4.0));
  } else {
    p.factor_ceiling = 1.0 - binary_entropy(std::clamp(p.table.e11_xx() - kMargin, 0.0, 0.5));
  }
  if (is_oracle(options.protocol)) {
    p.y11 = p.table.y11_zz();
  } else {
    p.intervals = options.pulses ? apply_finite_size(p.observed, *options.pulses) : to_intervals(p.observed);
    p.y11 = lower_bound_y11(*p.intervals, options.policy);
  }
  return p;
}

KeyRatePoint finish(const ProtocolConfig& config, const RateOptions& options, const Prelude& p) {
  KeyRatePoint out;
  out.distance_km = config.system.distance_km;
  out.mu_s = config.alice.signal.value();
  out.y11_lower = p.y11;
  out.gain = p.gain;
  out.error = p.error;
  out.protocol = protocol_label(options);
  out.pulses = options.pulses;
  switch (options.protocol) {
    case Protocol::ChshMdi: {
      std::array<ChshTermBound, 4> terms;
      for (std::size_t t = 0; t < 4; ++t) {
        const auto tag = kChshTags[t];
        terms[t] = estimate_chsh_term(*p.intervals, options.policy, tag,
                                      tag == BasisTag::QT ? RatioSide::Upper : RatioSide::Lower);
      }
      out.g11_lower = lower_bound_g11(terms);
      out.raw_rate = chsh_key_rate(p.p11, p.y11, out.g11_lower, p.gain, p.error, p.f);
      break;
    }
    case Protocol::ChshMdiOracle:
      out.g11_lower = p.table.g11();
      out.raw_rate = chsh_key_rate(p.p11, p.y11, out.g11_lower, p.gain, p.error, p.f);
      break;
    case Protocol::Mdi:
      out.e11_upper = upper_bound_e11(*p.intervals, options.policy).e11_upper;
      out.raw_rate = mdi_key_rate(p.p11, p.y11, out.e11_upper, p.gain, p.error, p.f);
      break;
    case Protocol::MdiOracle:
      out.e11_upper = std::min(0.5, p.table.e11_xx());
      out.raw_rate = mdi_key_rate(p.p11, p.y11, out.e11_upper, p.gain, p.error, p.f);
      break;
  }
  out.rate = std::max(out.raw_rate, 0.0);
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", x);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

const char* const kCsvHeader = "distance_km,mu_s,y11_lower,g11_lower,gain,error,rate,protocol,N";

double parse_field(const std::string& text, std::size_t line, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw std::invalid_argument("line " + std::to_string(line) + ": malformed " + column + " '" + text + "'");
  }
  return v;
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::ChshMdi: return "CHSH-MDI";
    case Protocol::Mdi: return "MDI";
    case Protocol::ChshMdiOracle: return "CHSH-MDI-oracle";
    case Protocol::MdiOracle: return "MDI-oracle";
  }
  return "?";
}

bool is_chsh(Protocol protocol) { return protocol == Protocol::ChshMdi || protocol == Protocol::ChshMdiOracle; }
bool is_oracle(Protocol protocol) { return protocol == Protocol::ChshMdiOracle || protocol == Protocol::MdiOracle; }

double privacy_factor(double g11) {
  if (!(g11 >= -4.0 && g11 <= 4.0)) throw std::domain_error("CHSH value must lie in [-4, 4]");
  return 1.0 - std::log2(1.0 + std::sqrt(std::max(0.0, 2.0 - g11 * g11 / 4.0)));
}

double chsh_key_rate(double p11, double y11, double g11, double gain, double error, double f) {
  require_unit(p11, "p11");
  require_unit(y11, "y11");
  if (!(g11 >= -4.0 && g11 <= 4.0)) throw std::domain_error("CHSH value must lie in [-4, 4]");
  // g11 is a lower bound and the factor grows with g only on [0, 4]; below 0
  // the worst case over all g >= g11 is at g = 0.
  return p11 * y11 * privacy_factor(std::max(g11, 0.0)) - leak(gain, error, f);
}

double mdi_key_rate(double p11, double y11, double e11, double gain, double error, double f) {
  require_unit(p11, "p11");
  require_unit(y11, "y11");
  require_unit(e11, "e11");
  return p11 * y11 * (1.0 - binary_entropy(e11)) - leak(gain, error, f);
}

double mdi_key_rate(const IntervalObservation& observed, const ObservedStatistics& point,
                    const TruncationPolicy& policy, double f) {
  const auto ks = point.signal_index_alice();
  const auto ls = point.signal_index_bob();
  const double p11 = poisson_pmf(point.alice()[ks], 1) * poisson_pmf(point.bob()[ls], 1);
  const double y11 = lower_bound_y11(observed, policy);
  const double e11 = upper_bound_e11(observed, policy).e11_upper;
  return mdi_key_rate(p11, y11, e11, point.gain_zz(ks, ls), point.error_zz(ks, ls), f);
}

void KeyRatePoint::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("key rate point: " + what); };
  if (!(distance_km >= 0.0) || !std::isfinite(distance_km)) fail("distance must be finite and non-negative");
  if (!(mu_s > 0.0) || !std::isfinite(mu_s)) fail("signal intensity must be positive");
  if (!(y11_lower >= 0.0 && y11_lower <= 1.0)) fail("y11_lower outside [0, 1]");
  if (!std::isnan(g11_lower) && !(g11_lower >= -4.0 && g11_lower <= 4.0)) fail("g11_lower outside [-4, 4]");
  if (!(gain >= 0.0 && gain <= 1.0)) fail("gain outside [0, 1]");
  if (!(error >= 0.0 && error <= 1.0)) fail("error outside [0, 1]");
  if (!std::isfinite(rate) || rate != std::max(raw_rate, 0.0)) fail("rate is not the clamped raw rate");
  if (rate > 0.0 && error > 0.5) fail("positive rate with error above 1/2");
  if (protocol.empty()) fail("missing protocol");
  if (protocol.starts_with("CHSH") && std::isnan(g11_lower)) fail("CHSH point without g11_lower");
  if (pulses && !(*pulses > 0.0 && std::isfinite(*pulses))) fail("pulse count must be positive");
}

void SignalGrid::validate() const {
  if (!(min > 0.0) || !std::isfinite(max) || !(max >= min)) {
    throw ConfigError("signal grid needs 0 < min <= max");
  }
  if (!(step > 0.0)) throw ConfigError("signal grid step must be positive");
}

std::vector<double> SignalGrid::values() const {
  validate();
  return arithmetic_range(min, max, step);
}

std::vector<double> arithmetic_range(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start) {
    throw std::invalid_argument("range needs start <= stop and a positive step");
  }
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) out.push_back(std::round((start + k * step) * 1e9) / 1e9);
  return out;
}

std::string protocol_label(const RateOptions& options) {
  std::string s(to_string(options.protocol));
  if (options.pulses) s += "-finite";
  return s;
}

KeyRatePoint evaluate_point(const ProtocolConfig& config, const RateOptions& options) {
  return finish(config, options, prelude(config, options));
}

KeyRatePoint optimize_signal(const ProtocolConfig& config, const RateOptions& options, double distance_km) {
  double floor = 0.0;
  if (!config.alice.decoys.empty()) floor = std::max(floor, config.alice.decoys.back().value());
  if (!config.bob.decoys.empty()) floor = std::max(floor, config.bob.decoys.back().value());

  struct Candidate {
    ProtocolConfig config;
    Prelude prelude;
    double ceiling;
  };
  std::vector<Candidate> candidates;
  for (double mu : options.grid.values()) {
    if (mu <= floor) continue;
    auto cfg = config.with_signal(mu).at_distance(distance_km);
    auto p = prelude(cfg, options);
    const double ceiling = std::max(0.0, p.p11 * p.y11 * p.factor_ceiling - leak(p.gain, p.error, p.f));
    candidates.push_back({std::move(cfg), std::move(p), ceiling});
  }
  if (candidates.empty()) throw ConfigError("signal grid has no value above the decoy intensities");

  // Most promising first, so the remaining candidates are usually skipped.
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return candidates[a].ceiling > candidates[b].ceiling; });

  std::optional<KeyRatePoint> best;
  for (std::size_t i : order) {
    const auto& c = candidates[i];
    if (best) {
      if (c.ceiling < best->rate) break;
      if (c.ceiling == best->rate && (best->rate == 0.0 || c.config.alice.signal.value() > best->mu_s)) continue;
    }
    auto point = finish(c.config, options, c.prelude);
    if (!best || point.rate > best->rate || (point.rate == best->rate && point.mu_s < best->mu_s)) {
      best = std::move(point);
    }
  }
  if (best->rate == 0.0 && best->mu_s != candidates.front().config.alice.signal.value()) {
    best = finish(candidates.front().config, options, candidates.front().prelude);
  }
  return *best;
}

std::optional<double> ScanResult::secure_distance() const {
  std::optional<double> out;
  for (const auto& p : points) {
    if (p.rate > 0.0) out = p.distance_km;
  }
  return out;
}

const KeyRatePoint* ScanResult::peak() const {
  const KeyRatePoint* best = nullptr;
  for (const auto& p : points) {
    if (!best || p.rate > best->rate) best = &p;
  }
  return best;
}

int worker_count() {
  if (const char* env = std::getenv("CHSHMDI_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ScanResult distance_scan(const ProtocolConfig& config, const RateOptions& options,
                         const std::vector<double>& distances) {
  if (distances.empty()) throw ConfigError("distance list is empty");
  for (std::size_t i = 1; i < distances.size(); ++i) {
    if (!(distances[i] > distances[i - 1])) throw ConfigError("distances must be strictly increasing");
  }
  config.validate();
  options.policy.validate();
  options.grid.validate();

  ScanResult scan;
  scan.metadata.protocol = protocol_label(options);
  scan.metadata.alice = values_of(config.alice.decoys);
  scan.metadata.bob = values_of(config.bob.decoys);
  scan.metadata.system = config.system;
  scan.metadata.cutoff = options.policy.cutoff;
  scan.metadata.phase_nodes = config.phase_nodes;
  scan.metadata.grid = options.grid;
  scan.metadata.pulses = options.pulses;
  scan.metadata.formula = is_chsh(options.protocol)
                              ? "R = P1(mu_s) P1(nu_s) Y11_ZZ (1 - log2(1 + sqrt(2 - g11^2/4))) - f Q_ZZ h(E_ZZ)"
                              : "R = P1(mu_s) P1(nu_s) Y11_ZZ (1 - h(e11_XX)) - f Q_ZZ h(E_ZZ)";

  std::vector<std::optional<KeyRatePoint>> results(distances.size());
  std::vector<std::exception_ptr> errors(distances.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < distances.size(); i = next++) {
      try {
        results[i] = optimize_signal(config, options, distances[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), distances.size());
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  pool.clear();

  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& r : results) scan.points.push_back(std::move(*r));
  return scan;
}

void refine_cutoff(ScanResult& scan, const ProtocolConfig& config, const RateOptions& options, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("refinement step must be positive");
  const auto secure = scan.secure_distance();
  if (!secure) return;
  auto it = std::find_if(scan.points.begin(), scan.points.end(),
                         [&](const KeyRatePoint& p) { return p.distance_km > *secure; });
  if (it == scan.points.end()) return;
  const auto gaps = static_cast<long>(std::floor((it->distance_km - *secure) / step - 1e-9));
  if (gaps < 1) return;
  std::vector<double> fill;
  for (long k = 1; k <= gaps; ++k) fill.push_back(std::round((*secure + k * step) * 1e9) / 1e9);
  auto extra = distance_scan(config, options, fill);
  scan.points.insert(it, std::make_move_iterator(extra.points.begin()), std::make_move_iterator(extra.points.end()));
}

void write_csv(std::ostream& os, const ScanResult& scan) {
  const auto& m = scan.metadata;
  os << "# protocol=" << m.protocol << "\n";
  os << "# alice_decoys=" << join(m.alice) << "\n";
  os << "# bob_decoys=" << join(m.bob) << "\n";
  os << "# dark_count=" << format_double(m.system.dark_count)
     << " det_efficiency=" << format_double(m.system.det_efficiency)
     << " fiber_loss_db_km=" << format_double(m.system.fiber_loss_db_km)
     << " f=" << format_double(m.system.recon_efficiency) << "\n";
  os << "# cutoff=" << m.cutoff << " phase_nodes=" << m.phase_nodes << " signal_grid=" << join({m.grid.min})
     << ":" << join({m.grid.max}) << ":" << join({m.grid.step}) << "\n";
  if (m.pulses) {
    os << "# N=" << format_double(*m.pulses)
       << " pulse pairs per (intensity pair, basis combination) setting, 5 standard deviations\n";
  } else {
    os << "# N=inf (asymptotic)\n";
  }
  os << "# " << m.formula << "\n";
  os << kCsvHeader << "\n";
  for (const auto& p : scan.points) {
    os << format_double(p.distance_km) << ',' << format_double(p.mu_s) << ',' << format_double(p.y11_lower) << ','
       << format_double(p.g11_lower) << ',' << format_double(p.gain) << ',' << format_double(p.error) << ','
       << format_double(p.rate) << ',' << p.protocol << ','
       << format_double(p.pulses ? *p.pulses : std::numeric_limits<double>::infinity()) << "\n";
  }
}

std::vector<KeyRatePoint> read_csv(std::istream& is) {
  std::vector<KeyRatePoint> out;
  std::string line;
  std::size_t number = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != kCsvHeader) throw std::invalid_argument("line " + std::to_string(number) + ": unexpected header");
      header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 9) {
      throw std::invalid_argument("line " + std::to_string(number) + ": expected 9 columns");
    }
    KeyRatePoint p;
    p.distance_km = parse_field(fields[0], number, "distance_km");
    p.mu_s = parse_field(fields[1], number, "mu_s");
    p.y11_lower = parse_field(fields[2], number, "y11_lower");
    p.g11_lower = parse_field(fields[3], number, "g11_lower");
    p.gain = parse_field(fields[4], number, "gain");
    p.error = parse_field(fields[5], number, "error");
    p.rate = parse_field(fields[6], number, "rate");
    p.raw_rate = p.rate;
    p.protocol = fields[7];
    const double n = parse_field(fields[8], number, "N");
    if (!std::isinf(n)) p.pulses = n;
    p.validate();
    out.push_back(std::move(p));
  }
  if (!header) throw std::invalid_argument("CSV header missing");
  return out;
}

}  // namespace chshmdi
