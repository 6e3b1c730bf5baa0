#include "fbl/link_sim.hpp"

#include <omp.h>

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <exception>
#include <numbers>

namespace fbl {

namespace {

constexpr std::uint64_t kChunk = 256;

}  // namespace

FrameLayout make_layout(const SystemConfig& cfg, int n_pilots,
                        const CodeSpec& spec, bool interleave_rbs) {
  validate_config(cfg);
  validate_code_spec(spec);
  if (cfg.n_tx != 1)
    throw DomainError("link simulation supports a single transmit antenna");
  if (n_pilots < 1 || n_pilots >= cfg.n_coh())
    throw DomainError("make_layout: need 1 <= n_pilots < n_coh");
  FrameLayout l;
  l.n_pilots_per_rb = n_pilots;
  l.n_coh = cfg.n_coh();
  l.n_res = cfg.n_res;
  l.n_rx = cfg.n_rx;
  l.data_slots_per_rb = l.n_coh - n_pilots;
  l.coded_bits = 2 * l.data_slots_per_rb * l.n_res;
  l.puncture_count = spec.n_coded_mother - l.coded_bits;
  l.interleave_rbs = interleave_rbs;
  if (l.puncture_count < 0)
    throw DomainError("make_layout: frame carries " + std::to_string(l.coded_bits) +
                      " bits, more than the " + std::to_string(spec.n_coded_mother) +
                      " mother-code bits");
  if (l.puncture_count >= spec.n_coded_mother)
    throw DomainError("make_layout: nothing left after puncturing");
  return l;
}

std::pair<int, int> data_symbol_slot(const FrameLayout& layout, int m) {
  if (layout.interleave_rbs)
    return {m % layout.n_res, layout.n_pilots_per_rb + m / layout.n_res};
  return {m / layout.data_slots_per_rb,
          layout.n_pilots_per_rb + m % layout.data_slots_per_rb};
}

cd qpsk_gray(std::uint8_t b0, std::uint8_t b1) {
  constexpr double a = std::numbers::sqrt2 / 2.0;
  return {b0 ? -a : a, b1 ? -a : a};
}

Packet build_packet(const Bits& coded_bits, const FrameLayout& layout,
                    const SystemConfig& cfg) {
  if (static_cast<int>(coded_bits.size()) != layout.coded_bits)
    throw DomainError("build_packet: expected " + std::to_string(layout.coded_bits) +
                      " coded bits, got " + std::to_string(coded_bits.size()));
  Packet p;
  p.slot_power = rb_power(cfg) / layout.n_coh;
  const double amp = std::sqrt(p.slot_power);
  p.rb.assign(layout.n_res, std::vector<cd>(layout.n_coh));
  for (int k = 0; k < layout.n_res; ++k)
    for (int s = 0; s < layout.n_pilots_per_rb; ++s) p.rb[k][s] = amp;
  const int symbols = layout.coded_bits / 2;
  for (int m = 0; m < symbols; ++m) {
    const auto [k, s] = data_symbol_slot(layout, m);
    p.rb[k][s] = amp * qpsk_gray(coded_bits[2 * m], coded_bits[2 * m + 1]);
  }
  return p;
}

Received channel_pass(const Packet& packet, const FrameLayout& layout,
                      RandomStream& stream) {
  const int r = layout.n_rx;
  Received rx;
  rx.y.resize(layout.n_res);
  rx.h.resize(layout.n_res);
  for (int k = 0; k < layout.n_res; ++k) {
    auto& h = rx.h[k];
    h.resize(r);
    for (auto& v : h) v = stream.complex_normal();
    auto& y = rx.y[k];
    y.resize(static_cast<std::size_t>(layout.n_coh) * r);
    for (int s = 0; s < layout.n_coh; ++s)
      for (int a = 0; a < r; ++a)
        y[s * r + a] = packet.rb[k][s] * h[a] + stream.complex_normal();
  }
  return rx;
}

std::vector<std::vector<cd>> estimate_channel_ml(const Received& rx,
                                                 const Packet& packet,
                                                 const FrameLayout& layout) {
  const int r = layout.n_rx;
  std::vector<std::vector<cd>> h(layout.n_res, std::vector<cd>(r));
  for (int k = 0; k < layout.n_res; ++k) {
    double energy = 0.0;
    for (int s = 0; s < layout.n_pilots_per_rb; ++s) energy += std::norm(packet.rb[k][s]);
    for (int a = 0; a < r; ++a) {
      cd acc = 0.0;
      for (int s = 0; s < layout.n_pilots_per_rb; ++s)
        acc += std::conj(packet.rb[k][s]) * rx.y[k][s * r + a];
      h[k][a] = acc / energy;
    }
  }
  return h;
}

std::vector<cd> mrc_combine(const Received& rx,
                            const std::vector<std::vector<cd>>& h_hat,
                            const FrameLayout& layout) {
  const int r = layout.n_rx;
  const int symbols = layout.n_res * layout.data_slots_per_rb;
  std::vector<cd> z(symbols);
  for (int m = 0; m < symbols; ++m) {
    const auto [k, s] = data_symbol_slot(layout, m);
    double g = 0.0;
    cd acc = 0.0;
    for (int a = 0; a < r; ++a) {
      g += std::norm(h_hat[k][a]);
      acc += std::conj(h_hat[k][a]) * rx.y[k][s * r + a];
    }
    z[m] = g > 0.0 ? acc / g : cd{};
  }
  return z;
}

std::vector<double> mrc_llr(const Received& rx,
                            const std::vector<std::vector<cd>>& h_hat,
                            const Packet& packet, const FrameLayout& layout,
                            const CodeSpec& spec) {
  const std::vector<cd> z = mrc_combine(rx, h_hat, layout);
  // With r = G z, G = sum |h|^2, noise CN(0, G): LLR = 2 sqrt(2 P) G Re/Im z.
  const double scale = 2.0 * std::sqrt(2.0 * packet.slot_power);
  std::vector<double> soft(static_cast<std::size_t>(layout.coded_bits));
  for (std::size_t m = 0; m < z.size(); ++m) {
    double g = 0.0;
    for (cd v : h_hat[data_symbol_slot(layout, static_cast<int>(m)).first]) g += std::norm(v);
    soft[2 * m] = scale * g * z[m].real();
    soft[2 * m + 1] = scale * g * z[m].imag();
  }
  std::vector<double> llr(spec.n_coded_mother, 0.0);
  const auto punct = puncture_positions(spec.n_coded_mother, layout.puncture_count);
  std::size_t next = 0, j = 0;
  for (int pos = 0; pos < spec.n_coded_mother; ++pos) {
    if (next < punct.size() && punct[next] == pos) {
      ++next;
      continue;
    }
    llr[pos] = soft[j++];
  }
  return llr;
}

std::pair<double, double> clopper_pearson(std::uint64_t errors,
                                          std::uint64_t trials, double alpha) {
  if (trials == 0) return {0.0, 1.0};
  if (errors > trials) throw DomainError("clopper_pearson: errors > trials");
  const double x = static_cast<double>(errors), n = static_cast<double>(trials);
  const double lo = errors == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2.0);
  const double hi =
      errors == trials ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2.0);
  return {lo, hi};
}

LinkSimulator::LinkSimulator(const CodeSpec& spec, int osd_order)
    : spec_(validate_code_spec(spec)),
      osd_(generator_matrix(spec), osd_order, tailbiting_distance_lower_bound(spec)) {}

bool LinkSimulator::run_packet(const SystemConfig& cfg, const FrameLayout& layout,
                               std::uint64_t seed, std::uint64_t index) const {
  RandomStream stream(seed, index, kLane);
  Bits info(spec_.k_info);
  for (auto& b : info) b = static_cast<std::uint8_t>(stream.next_u32() & 1u);
  const Bits coded = puncture(conv_encode_tailbiting(info, spec_), layout.puncture_count);
  const Packet packet = build_packet(coded, layout, cfg);
  const Received rx = channel_pass(packet, layout, stream);
  const auto h_hat = estimate_channel_ml(rx, packet, layout);
  const auto llr = mrc_llr(rx, h_hat, packet, layout, spec_);
  return osd_.decode(llr).info != info;
}

SimResult LinkSimulator::simulate_per(const SystemConfig& cfg_template, int n_pilots,
                                      double snr_db, const StopRule& stop,
                                      std::uint64_t seed, int threads,
                                      bool interleave_rbs) const {
  if (stop.max_packets < 1) throw DomainError("simulate_per: max_packets must be >= 1");
  SystemConfig cfg = cfg_template;
  cfg.snr_db = snr_db;
  const FrameLayout layout = make_layout(cfg, n_pilots, spec_, interleave_rbs);
  const int nt = threads > 0 ? threads : omp_get_max_threads();

  SimResult out;
  out.snr_db = snr_db;
  out.n_pilots = n_pilots;
  out.seed = seed;
  std::vector<std::uint8_t> err(kChunk);
  bool done = false;
  for (std::uint64_t base = 0; base < stop.max_packets && !done; base += kChunk) {
    const auto count =
        static_cast<std::int64_t>(std::min(kChunk, stop.max_packets - base));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        err[i] = run_packet(cfg, layout, seed, base + static_cast<std::uint64_t>(i));
      } catch (...) {
#pragma omp critical(fbl_link_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (std::int64_t i = 0; i < count; ++i) {
      ++out.packets_run;
      out.packet_errors += err[i];
      if (stop.min_errors > 0 && out.packet_errors >= stop.min_errors) {
        done = true;
        break;
      }
    }
  }
  out.per = static_cast<double>(out.packet_errors) / static_cast<double>(out.packets_run);
  std::tie(out.ci_low, out.ci_high) = clopper_pearson(out.packet_errors, out.packets_run);
  return out;
}

}  // namespace fbl
