#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace fbl {

/// Raised when the channel geometry cannot support the USTM analysis
/// (coherence interval too short for the antenna count).
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

enum class Link { uplink, downlink };

std::string to_string(Link link);
Link parse_link(const std::string& s);

struct SystemConfig {
  int n_tx = 1;
  int n_rx = 1;
  int n_res = 1;    // resource blocks per packet
  int n_subc = 12;  // subcarriers per RB
  int n_ofdm = 2;   // OFDM symbols per RB
  Link link = Link::uplink;
  double snr_db = 0.0;  // rho_u (uplink) or rho_d (downlink)

  int n_coh() const { return n_ofdm * n_subc; }
  int p() const { return n_tx > n_rx ? n_tx : n_rx; }
  int q() const { return n_tx < n_rx ? n_tx : n_rx; }
  int total_slots() const { return n_coh() * n_res; }

  bool operator==(const SystemConfig&) const = default;
};

struct PhysicalProfile {
  double ofdm_symbol_duration = 71.4e-6;  // seconds
  double subcarrier_spacing = 15e3;       // Hz
};

struct DerivedDims {
  int n_coh = 0;
  int total_slots = 0;
  double latency = 0.0;    // seconds
  double bandwidth = 0.0;  // Hz
  double rb_power = 0.0;   // linear per-RB SNR rho
};

double db_to_linear(double db);
double linear_to_db(double lin);

/// Returns cfg unchanged when every count is positive and
/// n_coh > n_tx + n_rx; throws otherwise.
const SystemConfig& validate_config(const SystemConfig& cfg);

/// Per-RB power rho: uplink n_ofdm*rho_u/n_res, downlink n_ofdm*n_subc*rho_d.
double rb_power(const SystemConfig& cfg);

DerivedDims derive_dimensions(const SystemConfig& cfg,
                              const PhysicalProfile& prof = {});

/// 64-bit FNV-1a over a canonical rendering of the config. Used to tag
/// sample batches so a cache file cannot be replayed against another setup.
std::uint64_t config_digest(const SystemConfig& cfg);

std::string describe(const SystemConfig& cfg);

// Flat key=value text format. '#' starts a comment. Keys are the
// SystemConfig field names; anything else is reported as an error unless
// the caller passes it through `extra_keys`.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values_file(const std::string& path);

/// Consumes the SystemConfig keys from kv (erasing them) and fills cfg.
void apply_config_keys(SystemConfig& cfg, KeyValues& kv);

/// Parses a config text in which only SystemConfig keys are allowed.
SystemConfig parse_system_config(const std::string& text);

}  // namespace fbl
