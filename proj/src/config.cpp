#include "fbl/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fbl {

std::string to_string(Link link) {
  return link == Link::uplink ? "uplink" : "downlink";
}

Link parse_link(const std::string& s) {
  if (s == "uplink" || s == "ul" || s == "UL") return Link::uplink;
  if (s == "downlink" || s == "dl" || s == "DL") return Link::downlink;
  throw std::invalid_argument("unknown link direction '" + s + "'");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

const SystemConfig& validate_config(const SystemConfig& cfg) {
  if (cfg.n_tx < 1 || cfg.n_rx < 1 || cfg.n_res < 1 || cfg.n_subc < 1 ||
      cfg.n_ofdm < 1)
    throw DomainError("all antenna and resource counts must be >= 1 (" +
                      describe(cfg) + ")");
  if (!std::isfinite(cfg.snr_db))
    throw DomainError("snr_db must be finite");
  if (cfg.n_coh() <= cfg.n_tx + cfg.n_rx)
    throw DimensionError("n_coh = " + std::to_string(cfg.n_coh()) +
                         " must exceed n_tx + n_rx = " +
                         std::to_string(cfg.n_tx + cfg.n_rx));
  return cfg;
}

double rb_power(const SystemConfig& cfg) {
  validate_config(cfg);
  const double lin = db_to_linear(cfg.snr_db);
  if (cfg.link == Link::uplink) return cfg.n_ofdm * lin / cfg.n_res;
  return static_cast<double>(cfg.n_ofdm) * cfg.n_subc * lin;
}

DerivedDims derive_dimensions(const SystemConfig& cfg,
                              const PhysicalProfile& prof) {
  validate_config(cfg);
  if (!(prof.ofdm_symbol_duration > 0.0) || !(prof.subcarrier_spacing > 0.0))
    throw DomainError("physical profile durations must be positive");
  DerivedDims d;
  d.n_coh = cfg.n_coh();
  d.total_slots = cfg.total_slots();
  d.latency = cfg.n_ofdm * prof.ofdm_symbol_duration;
  d.bandwidth =
      static_cast<double>(cfg.n_subc) * cfg.n_res * prof.subcarrier_spacing;
  d.rb_power = rb_power(cfg);
  return d;
}

std::string describe(const SystemConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "n_tx=" << cfg.n_tx << " n_rx=" << cfg.n_rx << " n_res=" << cfg.n_res
     << " n_subc=" << cfg.n_subc << " n_ofdm=" << cfg.n_ofdm
     << " link=" << to_string(cfg.link) << " snr_db=" << cfg.snr_db;
  return os.str();
}

std::uint64_t config_digest(const SystemConfig& cfg) {
  const std::string s = describe(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  int out = 0;
  try {
    out = std::stoi(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size())
    throw std::invalid_argument("key '" + key + "': expected integer, got '" +
                                v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size())
    throw std::invalid_argument("key '" + key + "': expected number, got '" +
                                v + "'");
  return out;
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    if (kv.count(key))
      throw std::invalid_argument("config key '" + key + "' given twice");
    kv[key] = val;
  }
  return kv;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_key_values(ss.str());
}

void apply_config_keys(SystemConfig& cfg, KeyValues& kv) {
  auto take = [&](const char* key, auto&& fn) {
    if (auto it = kv.find(key); it != kv.end()) {
      fn(it->second);
      kv.erase(it);
    }
  };
  take("n_tx", [&](const std::string& v) { cfg.n_tx = parse_int("n_tx", v); });
  take("n_rx", [&](const std::string& v) { cfg.n_rx = parse_int("n_rx", v); });
  take("n_res",
       [&](const std::string& v) { cfg.n_res = parse_int("n_res", v); });
  take("n_subc",
       [&](const std::string& v) { cfg.n_subc = parse_int("n_subc", v); });
  take("n_ofdm",
       [&](const std::string& v) { cfg.n_ofdm = parse_int("n_ofdm", v); });
  take("link", [&](const std::string& v) { cfg.link = parse_link(v); });
  take("snr_db",
       [&](const std::string& v) { cfg.snr_db = parse_double("snr_db", v); });
}

SystemConfig parse_system_config(const std::string& text) {
  KeyValues kv = parse_key_values(text);
  SystemConfig cfg;
  apply_config_keys(cfg, kv);
  if (!kv.empty())
    throw std::invalid_argument("unknown config key '" + kv.begin()->first +
                                "'");
  return validate_config(cfg);
}

}  // namespace fbl
