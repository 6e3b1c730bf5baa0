#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fbl/code.hpp"
#include "fbl/config.hpp"
#include "fbl/link_sim.hpp"

namespace fbl {

inline constexpr const char* kVersion = "0.3.0";

enum class Command { bounds, eexp, simulate };

std::string to_string(Command c);
Command parse_command(const std::string& s);

/// Everything one sweep needs. Parsed from flat key=value text; list-valued
/// keys accept "1,2,4", "1:25" or a mix ("1:4,8").
struct ExperimentPreset {
  Command command = Command::bounds;
  Link link = Link::uplink;
  std::vector<int> n_tx{1}, n_rx{1}, n_ofdm{2}, n_res{1};
  int n_subc = 12;
  int subcarriers_per_packet = 0;  // > 0: n_subc = this / n_res per point
  double snr_db = 0.0;
  double epsilon = 1e-5;
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;

  // eexp and simulate: SNR grid snr_min, snr_min + step, ... <= snr_max
  double snr_min = 0.0, snr_max = 0.0, snr_step = 1.0;
  int k_bits = 0;

  std::vector<int> n_pilots{6};
  StopRule stop;
  int osd_order = 3;
  CodeSpec code;
  bool interleave_rbs = true;
};

std::vector<int> parse_int_list(const std::string& s);
std::string format_int_list(const std::vector<int>& v);

/// Accepts "1000000", "1e7", "2.5e5"; rejects non-integers and negatives.
std::uint64_t parse_count(const std::string& s);

/// Unknown keys, malformed values and inconsistent settings throw
/// DomainError. Keys: command link n_tx n_rx n_ofdm n_res n_subc
/// subcarriers_per_packet snr_db epsilon samples seed snr_min snr_max
/// snr_step k_bits n_pilots min_errors max_packets osd_order memory
/// generators interleave_rbs.
ExperimentPreset parse_experiment(KeyValues kv);
ExperimentPreset parse_experiment_text(const std::string& text);

/// Exact grid: snr_min + i * step for i = 0.. while not above snr_max
/// (with a 1e-9 dB allowance for rounding).
std::vector<double> snr_grid(double snr_min, double snr_max, double step);

/// Resolved config for one sweep point (subcarriers_per_packet applied).
SystemConfig point_config(const ExperimentPreset& p, int n_tx, int n_rx,
                          int n_ofdm, int n_res);

/// "fbl <cmd> --flag value ..." reproducing `p` exactly; no thread count.
std::string rerun_command(const ExperimentPreset& p);

/// "# fbl <version> | <rerun command>"
std::string csv_comment(const ExperimentPreset& p);

struct BoundsRow {
  SystemConfig cfg;
  double bandwidth_hz = 0.0, latency_s = 0.0;
  double achievability = 0.0, converse = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

struct EexpRow {
  SystemConfig cfg;
  double eps_avg = 1.0, eps_max = 1.0, mu_star = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Sweep order: n_tx, n_rx, n_ofdm, n_res (innermost). Every point uses
/// the preset seed. Downlink sweeps share draws across n_res.
std::vector<BoundsRow> run_bounds(const ExperimentPreset& p, int threads = 0);
/// Sweep order: n_tx, n_rx, n_ofdm, n_res, then SNR.
std::vector<EexpRow> run_eexp(const ExperimentPreset& p, int threads = 0);
/// Sweep order: n_pilots, then SNR. Needs one value each of n_tx (= 1),
/// n_rx, n_ofdm and n_res.
std::vector<SimResult> run_simulate(const ExperimentPreset& p, int threads = 0);

void write_bounds_csv(std::ostream& os, const ExperimentPreset& p,
                      const std::vector<BoundsRow>& rows);
void write_eexp_csv(std::ostream& os, const ExperimentPreset& p,
                    const std::vector<EexpRow>& rows);
void write_sim_csv(std::ostream& os, const ExperimentPreset& p,
                   const std::vector<SimResult>& rows);

}  // namespace fbl
