#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "fbl/code.hpp"
#include "fbl/config.hpp"
#include "fbl/osd.hpp"
#include "fbl/rng.hpp"

namespace fbl {

using cd = std::complex<double>;

struct FrameLayout {
  int n_pilots_per_rb = 1;
  int n_coh = 0;
  int n_res = 0;
  int n_rx = 1;
  int data_slots_per_rb = 0;
  int coded_bits = 0;      // 2 (n_coh - np) n_res
  int puncture_count = 0;  // n_coded_mother - coded_bits
  // QPSK symbol m goes to RB m mod n_res (data slot m / n_res), so a
  // trellis error event is spread over every RB. Off: RB-major filling.
  bool interleave_rbs = true;
};

/// Throws DomainError if the frame cannot carry the code (more QPSK bits
/// than mother-code bits, or puncturing everything) or n_tx != 1.
FrameLayout make_layout(const SystemConfig& cfg, int n_pilots,
                        const CodeSpec& spec, bool interleave_rbs = true);

/// (RB, slot) carrying the m-th QPSK data symbol.
std::pair<int, int> data_symbol_slot(const FrameLayout& layout, int m);

/// Gray QPSK: bit 0 on the real axis, bit 1 on the imaginary axis, 0 -> +.
/// Unit energy.
cd qpsk_gray(std::uint8_t b0, std::uint8_t b1);

/// Per-RB transmit sequence of n_coh symbols: np pilots (constant 1), then
/// data; every slot carries power rho / n_coh so each RB has energy rho.
struct Packet {
  std::vector<std::vector<cd>> rb;
  double slot_power = 0.0;
};

Packet build_packet(const Bits& coded_bits, const FrameLayout& layout,
                    const SystemConfig& cfg);

/// y[k][slot * n_rx + a]; h[k][a] is kept for diagnostics.
struct Received {
  std::vector<std::vector<cd>> y;
  std::vector<std::vector<cd>> h;
};

/// Y_k = x_k h_k^T + W_k, fresh CN(0,1) fading and noise per RB.
Received channel_pass(const Packet& packet, const FrameLayout& layout,
                      RandomStream& stream);

/// Least-squares (= ML under Gaussian noise) estimate per RB and antenna
/// from the pilot slots: sum conj(x_p) y_p / sum |x_p|^2.
std::vector<std::vector<cd>> estimate_channel_ml(const Received& rx,
                                                 const Packet& packet,
                                                 const FrameLayout& layout);

/// MRC output per data symbol, sum_a conj(h_a) y_a / sum_a |h_a|^2, in
/// symbol order (see data_symbol_slot).
std::vector<cd> mrc_combine(const Received& rx,
                            const std::vector<std::vector<cd>>& h_hat,
                            const FrameLayout& layout);

/// Bitwise LLRs for all n_coded_mother positions, treating h_hat as the
/// true channel. Punctured positions get 0.
std::vector<double> mrc_llr(const Received& rx,
                            const std::vector<std::vector<cd>>& h_hat,
                            const Packet& packet, const FrameLayout& layout,
                            const CodeSpec& spec);

struct StopRule {
  std::uint64_t min_errors = 100;
  std::uint64_t max_packets = 100000;
};

struct SimResult {
  double snr_db = 0.0;
  int n_pilots = 0;
  std::uint64_t packets_run = 0;
  std::uint64_t packet_errors = 0;
  double per = 0.0;
  double ci_low = 0.0;  // Clopper-Pearson, 95%
  double ci_high = 1.0;
  std::uint64_t seed = 0;
};

/// Exact two-sided Clopper-Pearson interval at confidence 1 - alpha.
std::pair<double, double> clopper_pearson(std::uint64_t errors,
                                          std::uint64_t trials,
                                          double alpha = 0.05);

/// Everything that is fixed across packets: code, puncturing, decoder.
class LinkSimulator {
public:
  LinkSimulator(const CodeSpec& spec, int osd_order = 3);

  const CodeSpec& spec() const { return spec_; }
  const OsdDecoder& decoder() const { return osd_; }

  /// One packet through the whole chain; true on a packet error. Packet i
  /// of a run draws everything from RandomStream(seed, i, lane).
  bool run_packet(const SystemConfig& cfg, const FrameLayout& layout,
                  std::uint64_t seed, std::uint64_t index) const;

  /// Packets run in index order until min_errors errors (the run ends at
  /// the packet that reaches it) or max_packets. Independent of threads.
  SimResult simulate_per(const SystemConfig& cfg, int n_pilots,
                         double snr_db, const StopRule& stop,
                         std::uint64_t seed, int threads = 0,
                         bool interleave_rbs = true) const;

  static constexpr std::uint32_t kLane = 5;

private:
  CodeSpec spec_;
  OsdDecoder osd_;
};

}  // namespace fbl
