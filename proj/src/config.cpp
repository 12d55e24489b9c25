#include "chshmdi/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace chshmdi {

namespace {

constexpr std::array<std::string_view, 12> kKeys = {"protocol", "decoys",     "signal_grid", "dark_count",
                                                    "det_efficiency", "fiber_loss_db_km", "f", "distances",
                                                    "N",        "cutoff",     "phase_nodes", "out"};
constexpr std::array<std::string_view, 8> kRequired = {"protocol", "decoys", "dark_count", "det_efficiency",
                                                       "fiber_loss_db_km", "f", "distances", "out"};

// Carries the key so the parser can point at the line that set it.
struct KeyError : ConfigError {
  KeyError(std::string k, const std::string& what) : ConfigError(k + ": " + what), key(std::move(k)) {}
  std::string key;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double number(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size() || !std::isfinite(v)) {
    throw KeyError(std::string(key), "malformed number '" + std::string(text) + "'");
  }
  return v;
}

int integer(std::string_view key, std::string_view text) {
  text = trim(text);
  int v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw KeyError(std::string(key), "malformed integer '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  for (std::size_t pos = 0;;) {
    const auto next = text.find(sep, pos);
    out.push_back(text.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::array<double, 3> triple(std::string_view key, std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw KeyError(std::string(key), "expected start:stop:step");
  return {number(key, parts[0]), number(key, parts[1]), number(key, parts[2])};
}

Protocol protocol_named(std::string_view text) {
  for (auto p : {Protocol::ChshMdi, Protocol::Mdi, Protocol::ChshMdiOracle, Protocol::MdiOracle}) {
    if (config_name(p) == text) return p;
  }
  throw KeyError("protocol", "unknown protocol '" + std::string(text) +
                                 "' (chsh-mdi, mdi, chsh-mdi-oracle, mdi-oracle)");
}

std::string format(double x) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

}  // namespace

std::string_view config_name(Protocol protocol) {
  switch (protocol) {
    case Protocol::ChshMdi: return "chsh-mdi";
    case Protocol::Mdi: return "mdi";
    case Protocol::ChshMdiOracle: return "chsh-mdi-oracle";
    case Protocol::MdiOracle: return "mdi-oracle";
  }
  return "?";
}

void RunConfig::validate() const {
  if (decoys.size() < 2) {
    throw KeyError("decoys", "need at least two decoy intensities (three intensities with the signal)");
  }
  for (std::size_t i = 0; i < decoys.size(); ++i) {
    if (!(decoys[i] >= 0.0)) throw KeyError("decoys", "intensities must be non-negative");
    if (i > 0 && !(decoys[i] > decoys[i - 1])) throw KeyError("decoys", "not strictly increasing");
  }
  try {
    signal_grid.validate();
  } catch (const ConfigError& e) {
    throw KeyError("signal_grid", e.what());
  }
  if (!(signal_grid.max > decoys.back())) {
    throw KeyError("signal_grid", "maximum must exceed the largest decoy intensity");
  }
  if (!(system.dark_count >= 0.0 && system.dark_count < 1.0)) throw KeyError("dark_count", "must lie in [0, 1)");
  if (!(system.det_efficiency > 0.0 && system.det_efficiency <= 1.0)) {
    throw KeyError("det_efficiency", "must lie in (0, 1]");
  }
  if (!(system.fiber_loss_db_km >= 0.0)) throw KeyError("fiber_loss_db_km", "must be non-negative");
  if (!(system.recon_efficiency >= 1.0)) throw KeyError("f", "reconciliation efficiency below 1");
  if (!(distances.step > 0.0)) throw KeyError("distances", "step must be positive");
  if (!(distances.start >= 0.0)) throw KeyError("distances", "start must be non-negative");
  if (!(distances.stop > distances.start)) throw KeyError("distances", "empty range: stop must exceed start");
  if (pulses) {
    if (!(*pulses > 0.0)) throw KeyError("N", "pulse count must be positive");
    if (is_oracle(protocol)) throw KeyError("N", "oracle protocols have no finite-size variant");
  }
  if (cutoff < 2 || cutoff > kMaxFockPhotons) {
    throw KeyError("cutoff", "must lie in [2, " + std::to_string(kMaxFockPhotons) + "]");
  }
  if (phase_nodes < 16 || phase_nodes % 2 != 0) throw KeyError("phase_nodes", "must be an even number >= 16");
  if (out.empty()) throw KeyError("out", "output path is empty");
}

ProtocolConfig RunConfig::protocol_config(double signal) const {
  auto c = symmetric_config(decoys, signal, system);
  c.system.distance_km = 0.0;
  c.phase_nodes = phase_nodes;
  return c;
}

RateOptions RunConfig::rate_options() const {
  RateOptions o;
  o.protocol = protocol;
  o.policy.cutoff = cutoff;
  o.grid = signal_grid;
  o.pulses = pulses;
  return o;
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  c.system.distance_km = 0.0;
  std::map<std::string, std::size_t, std::less<>> line_of;
  std::size_t number_of_line = 0;
  try {
    for (auto raw : split(text, '\n')) {
      ++number_of_line;
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      const auto line = trim(raw);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      const auto value = trim(line.substr(eq + 1));
      if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
        throw ConfigError("unknown key '" + key + "'");
      }
      if (line_of.contains(key)) throw KeyError(key, "given twice");
      line_of.emplace(key, number_of_line);

      if (key == "protocol") {
        c.protocol = protocol_named(value);
      } else if (key == "decoys") {
        c.decoys.clear();
        for (auto part : split(value, ',')) c.decoys.push_back(number(key, part));
      } else if (key == "signal_grid") {
        const auto t = triple(key, value);
        c.signal_grid = {t[0], t[1], t[2]};
      } else if (key == "dark_count") {
        c.system.dark_count = number(key, value);
      } else if (key == "det_efficiency") {
        c.system.det_efficiency = number(key, value);
      } else if (key == "fiber_loss_db_km") {
        c.system.fiber_loss_db_km = number(key, value);
      } else if (key == "f") {
        c.system.recon_efficiency = number(key, value);
      } else if (key == "distances") {
        const auto t = triple(key, value);
        c.distances = {t[0], t[1], t[2]};
      } else if (key == "N") {
        c.pulses = number(key, value);
      } else if (key == "cutoff") {
        c.cutoff = integer(key, value);
      } else if (key == "phase_nodes") {
        c.phase_nodes = integer(key, value);
      } else if (key == "out") {
        if (value.empty()) throw KeyError(key, "output path is empty");
        c.out = std::string(value);
      }
    }
  } catch (const ConfigError& e) {
    throw ConfigError("line " + std::to_string(number_of_line) + ": " + e.what());
  }
  for (auto key : kRequired) {
    if (!line_of.contains(key)) throw ConfigError("missing key '" + std::string(key) + "'");
  }
  try {
    c.validate();
  } catch (const KeyError& e) {
    const auto it = line_of.find(e.key);
    if (it == line_of.end()) throw ConfigError(std::string(e.what()) + " (default value)");
    throw ConfigError("line " + std::to_string(it->second) + ": " + e.what());
  }
  return c;
}

std::string render(const RunConfig& c) {
  std::ostringstream os;
  os << "protocol = " << config_name(c.protocol) << "\n";
  os << "decoys = ";
  for (std::size_t i = 0; i < c.decoys.size(); ++i) os << (i ? "," : "") << format(c.decoys[i]);
  os << "\n";
  os << "signal_grid = " << format(c.signal_grid.min) << ":" << format(c.signal_grid.max) << ":"
     << format(c.signal_grid.step) << "\n";
  os << "dark_count = " << format(c.system.dark_count) << "\n";
  os << "det_efficiency = " << format(c.system.det_efficiency) << "\n";
  os << "fiber_loss_db_km = " << format(c.system.fiber_loss_db_km) << "\n";
  os << "f = " << format(c.system.recon_efficiency) << "\n";
  os << "distances = " << format(c.distances.start) << ":" << format(c.distances.stop) << ":"
     << format(c.distances.step) << "\n";
  if (c.pulses) os << "N = " << format(*c.pulses) << "\n";
  os << "cutoff = " << c.cutoff << "\n";
  os << "phase_nodes = " << c.phase_nodes << "\n";
  os << "out = " << c.out << "\n";
  return os.str();
}

}  // namespace chshmdi
