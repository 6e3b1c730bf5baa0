#include "fbl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "fbl/bounds.hpp"
#include "fbl/error_exponent.hpp"
#include "fbl/info_density.hpp"

namespace fbl {

namespace {

// Most doubles held at once by a downlink prefix group.
constexpr std::size_t kPrefixBudget = 40'000'000;

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
    throw DomainError(key + ": '" + v + "' is not an integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out))
    throw DomainError(key + ": '" + v + "' is not a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw DomainError(key + ": '" + v + "' is not a boolean");
}

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::bounds: return "bounds";
    case Command::eexp: return "eexp";
    case Command::simulate: return "simulate";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  if (s == "bounds") return Command::bounds;
  if (s == "eexp") return Command::eexp;
  if (s == "simulate") return Command::simulate;
  throw DomainError("unknown command '" + s + "'");
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = std::min(s.find(',', pos), s.size());
    const std::string item = strip(s.substr(pos, comma - pos));
    if (item.empty()) throw DomainError("empty item in list '" + s + "'");
    if (const auto colon = item.find(':'); colon != std::string::npos) {
      const int a = to_int("range", strip(item.substr(0, colon)));
      const int b = to_int("range", strip(item.substr(colon + 1)));
      if (b < a) throw DomainError("descending range '" + item + "'");
      for (int v = a; v <= b; ++v) out.push_back(v);
    } else {
      out.push_back(to_int("list", item));
    }
    pos = comma + 1;
  }
  return out;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[j] + 1) ++j;
    if (!out.empty()) out += ',';
    out += std::to_string(v[i]);
    if (j >= i + 2) {
      out += ':' + std::to_string(v[j]);
    } else if (j == i + 1) {
      out += ',' + std::to_string(v[j]);
    }
    i = j + 1;
  }
  return out;
}

std::uint64_t parse_count(const std::string& s) {
  const std::string t = strip(s);
  std::uint64_t u = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), u);
  if (r.ec == std::errc{} && r.ptr == t.data() + t.size()) return u;
  const double d = to_double("count", t);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19)
    throw DomainError("'" + s + "' is not a nonnegative integer count");
  return static_cast<std::uint64_t>(d);
}

ExperimentPreset parse_experiment(KeyValues kv) {
  ExperimentPreset p;
  auto take = [&](const char* key, auto&& fn) {
    if (auto it = kv.find(key); it != kv.end()) {
      fn(key, strip(it->second));
      kv.erase(it);
    }
  };
  auto positive_list = [](const char* key, const std::string& v) {
    auto l = parse_int_list(v);
    for (int x : l)
      if (x < 1) throw DomainError(std::string(key) + ": values must be >= 1");
    return l;
  };
  take("command", [&](auto, const std::string& v) { p.command = parse_command(v); });
  take("link", [&](auto, const std::string& v) {
    try {
      p.link = parse_link(v);
    } catch (const std::invalid_argument& e) {
      throw DomainError(e.what());
    }
  });
  take("n_tx", [&](auto k, const std::string& v) { p.n_tx = positive_list(k, v); });
  take("n_rx", [&](auto k, const std::string& v) { p.n_rx = positive_list(k, v); });
  take("n_ofdm", [&](auto k, const std::string& v) { p.n_ofdm = positive_list(k, v); });
  take("n_res", [&](auto k, const std::string& v) { p.n_res = positive_list(k, v); });
  take("n_pilots", [&](auto k, const std::string& v) { p.n_pilots = positive_list(k, v); });
  take("n_subc", [&](auto k, const std::string& v) { p.n_subc = to_int(k, v); });
  take("subcarriers_per_packet",
       [&](auto k, const std::string& v) { p.subcarriers_per_packet = to_int(k, v); });
  take("snr_db", [&](auto k, const std::string& v) { p.snr_db = to_double(k, v); });
  take("epsilon", [&](auto k, const std::string& v) { p.epsilon = to_double(k, v); });
  take("samples", [&](auto, const std::string& v) { p.samples = parse_count(v); });
  take("seed", [&](auto, const std::string& v) { p.seed = parse_count(v); });
  take("snr_min", [&](auto k, const std::string& v) { p.snr_min = to_double(k, v); });
  take("snr_max", [&](auto k, const std::string& v) { p.snr_max = to_double(k, v); });
  take("snr_step", [&](auto k, const std::string& v) { p.snr_step = to_double(k, v); });
  take("k_bits", [&](auto k, const std::string& v) { p.k_bits = to_int(k, v); });
  take("min_errors", [&](auto, const std::string& v) { p.stop.min_errors = parse_count(v); });
  take("max_packets", [&](auto, const std::string& v) { p.stop.max_packets = parse_count(v); });
  take("osd_order", [&](auto k, const std::string& v) { p.osd_order = to_int(k, v); });
  take("k_info", [&](auto k, const std::string& v) {
    p.code.k_info = to_int(k, v);
    p.code.n_coded_mother = 4 * p.code.k_info;
  });
  take("memory", [&](auto k, const std::string& v) { p.code.memory = to_int(k, v); });
  take("generators", [&](auto, const std::string& v) {
    p.code.generators.clear();
    std::size_t pos = 0;
    while (pos <= v.size()) {
      const auto comma = std::min(v.find(',', pos), v.size());
      p.code.generators.push_back(parse_octal(strip(v.substr(pos, comma - pos))));
      pos = comma + 1;
    }
  });
  take("interleave_rbs", [&](auto k, const std::string& v) { p.interleave_rbs = to_bool(k, v); });
  if (!kv.empty()) throw DomainError("unknown key '" + kv.begin()->first + "'");

  if (p.n_subc < 1) throw DomainError("n_subc must be >= 1");
  if (p.subcarriers_per_packet < 0) throw DomainError("subcarriers_per_packet must be >= 0");
  if (p.subcarriers_per_packet > 0)
    for (int r : p.n_res)
      if (p.subcarriers_per_packet % r != 0)
        throw DomainError("subcarriers_per_packet " + std::to_string(p.subcarriers_per_packet) +
                          " is not divisible by n_res " + std::to_string(r));
  if (p.samples < 1) throw DomainError("samples must be >= 1");
  switch (p.command) {
    case Command::bounds:
      if (!(p.epsilon > 0.0 && p.epsilon < 1.0))
        throw DomainError("epsilon must lie in (0,1)");
      break;
    case Command::eexp:
      if (p.k_bits < 1) throw DomainError("eexp needs k_bits >= 1");
      [[fallthrough]];
    case Command::simulate:
      if (!(p.snr_step > 0.0)) throw DomainError("snr_step must be > 0");
      if (p.snr_max < p.snr_min) throw DomainError("snr_max < snr_min");
      break;
  }
  if (p.command == Command::simulate) {
    validate_code_spec(p.code);
    if (p.osd_order < 0) throw DomainError("osd_order must be >= 0");
    if (p.n_tx.size() != 1 || p.n_rx.size() != 1 || p.n_ofdm.size() != 1 ||
        p.n_res.size() != 1)
      throw DomainError("simulate takes a single n_tx, n_rx, n_ofdm and n_res");
    if (p.stop.max_packets < 1) throw DomainError("max_packets must be >= 1");
  }
  return p;
}

ExperimentPreset parse_experiment_text(const std::string& text) {
  try {
    return parse_experiment(parse_key_values(text));
  } catch (const std::invalid_argument& e) {
    throw DomainError(e.what());
  }
}

std::vector<double> snr_grid(double snr_min, double snr_max, double step) {
  if (!(step > 0.0)) throw DomainError("snr_grid: step must be > 0");
  std::vector<double> g;
  for (long i = 0;; ++i) {
    const double s = snr_min + static_cast<double>(i) * step;
    if (s > snr_max + 1e-9) break;
    g.push_back(s);
  }
  return g;
}

SystemConfig point_config(const ExperimentPreset& p, int n_tx, int n_rx,
                          int n_ofdm, int n_res) {
  SystemConfig c;
  c.link = p.link;
  c.n_tx = n_tx;
  c.n_rx = n_rx;
  c.n_ofdm = n_ofdm;
  c.n_res = n_res;
  c.n_subc = p.subcarriers_per_packet > 0 ? p.subcarriers_per_packet / n_res : p.n_subc;
  c.snr_db = p.snr_db;
  return validate_config(c);
}

std::string rerun_command(const ExperimentPreset& p) {
  std::string s = "fbl " + to_string(p.command);
  auto flag = [&](const char* name, const std::string& v) { s += std::string(" --") + name + ' ' + v; };
  flag("link", to_string(p.link));
  flag("ntx", format_int_list(p.n_tx));
  flag("nrx", format_int_list(p.n_rx));
  flag("nofdm", format_int_list(p.n_ofdm));
  flag("nres", format_int_list(p.n_res));
  if (p.subcarriers_per_packet > 0)
    flag("subcarriers-per-packet", std::to_string(p.subcarriers_per_packet));
  else
    flag("nsubc", std::to_string(p.n_subc));
  if (p.command == Command::bounds) {
    flag("snr", num(p.snr_db));
    flag("epsilon", num(p.epsilon));
  } else {
    flag("snr-min", num(p.snr_min));
    flag("snr-max", num(p.snr_max));
    flag("snr-step", num(p.snr_step));
  }
  if (p.command == Command::eexp) flag("kbits", std::to_string(p.k_bits));
  if (p.command == Command::simulate) {
    flag("np", format_int_list(p.n_pilots));
    flag("min-errors", std::to_string(p.stop.min_errors));
    flag("max-packets", std::to_string(p.stop.max_packets));
    flag("order", std::to_string(p.osd_order));
    flag("kinfo", std::to_string(p.code.k_info));
    flag("memory", std::to_string(p.code.memory));
    std::string g;
    for (auto x : p.code.generators) g += (g.empty() ? "" : ",") + to_octal(x);
    flag("generators", g);
    flag("interleave", p.interleave_rbs ? "1" : "0");
  } else {
    flag("samples", std::to_string(p.samples));
  }
  flag("seed", std::to_string(p.seed));
  return s;
}

std::string csv_comment(const ExperimentPreset& p) {
  return std::string("# fbl ") + kVersion + " | " + rerun_command(p);
}

std::vector<BoundsRow> run_bounds(const ExperimentPreset& p, int threads) {
  BatchOptions opts;
  opts.threads = threads;
  std::vector<BoundsRow> rows;
  auto add = [&](const SystemConfig& c, const SumSampleBatch& b) {
    const auto dims = derive_dimensions(c);
    BoundsRow r;
    r.cfg = c;
    r.bandwidth_hz = dims.bandwidth;
    r.latency_s = dims.latency;
    r.achievability = dt_max_rate(b, c, p.epsilon).rate_bits_per_slot;
    r.converse = mc_rate_upper(b, c, p.epsilon).rate_bits_per_slot;
    r.n_samples = b.values.size();
    r.seed = b.seed;
    rows.push_back(r);
  };
  for (int t : p.n_tx)
    for (int r : p.n_rx)
      for (int o : p.n_ofdm) {
        if (p.link == Link::downlink && p.subcarriers_per_packet == 0) {
          // Downlink RB power does not depend on n_res, so one pass of
          // per-RB draws serves every n_res through prefix sums.
          const std::set<int> uniq(p.n_res.begin(), p.n_res.end());
          const std::vector<int> sorted(uniq.begin(), uniq.end());
          const std::size_t group =
              std::max<std::size_t>(1, kPrefixBudget / std::max<std::size_t>(p.samples, 1));
          std::map<int, BoundsRow> done;
          for (std::size_t g = 0; g < sorted.size(); g += group) {
            const std::vector<int> part(sorted.begin() + g,
                                        sorted.begin() + std::min(sorted.size(), g + group));
            const SystemConfig c0 = point_config(p, t, r, o, part.back());
            const auto batches = sample_sum_batch_prefixes(c0, part, p.samples, p.seed, opts);
            for (std::size_t j = 0; j < part.size(); ++j) {
              add(point_config(p, t, r, o, part[j]), batches[j]);
              done[part[j]] = rows.back();
              rows.pop_back();
            }
          }
          for (int n : p.n_res) rows.push_back(done.at(n));
        } else {
          for (int n : p.n_res) {
            const SystemConfig c = point_config(p, t, r, o, n);
            add(c, sample_sum_batch(c, p.samples, p.seed, opts));
          }
        }
      }
  return rows;
}

std::vector<EexpRow> run_eexp(const ExperimentPreset& p, int threads) {
  ExponentOptions opts;
  opts.threads = threads;
  const auto grid = snr_grid(p.snr_min, p.snr_max, p.snr_step);
  std::vector<EexpRow> rows;
  for (int t : p.n_tx)
    for (int r : p.n_rx)
      for (int o : p.n_ofdm)
        for (int n : p.n_res) {
          const SystemConfig c = point_config(p, t, r, o, n);
          const auto curve = eexp_curve(c, p.k_bits, grid, p.samples, p.seed, opts);
          for (const auto& pt : curve) {
            EexpRow row;
            row.cfg = c;
            row.cfg.snr_db = pt.snr_db;
            row.eps_avg = pt.bound.eps_avg;
            row.eps_max = pt.bound.eps_max;
            row.mu_star = pt.bound.mu_star;
            row.n_samples = pt.bound.n_samples;
            row.seed = pt.bound.seed;
            rows.push_back(row);
          }
        }
  return rows;
}

std::vector<SimResult> run_simulate(const ExperimentPreset& p, int threads) {
  const SystemConfig c = point_config(p, p.n_tx[0], p.n_rx[0], p.n_ofdm[0], p.n_res[0]);
  const LinkSimulator sim(p.code, p.osd_order);
  for (int np : p.n_pilots) make_layout(c, np, p.code, p.interleave_rbs);
  std::vector<SimResult> rows;
  for (int np : p.n_pilots)
    for (double snr : snr_grid(p.snr_min, p.snr_max, p.snr_step))
      rows.push_back(sim.simulate_per(c, np, snr, p.stop, p.seed, threads, p.interleave_rbs));
  return rows;
}

void write_bounds_csv(std::ostream& os, const ExperimentPreset& p,
                      const std::vector<BoundsRow>& rows) {
  os << csv_comment(p) << '\n'
     << "n_res,n_ofdm,bandwidth_hz,latency_s,achievability_bits_per_slot,"
        "converse_bits_per_slot,n_samples,seed,n_tx,n_rx,n_subc\n";
  for (const auto& r : rows)
    os << r.cfg.n_res << ',' << r.cfg.n_ofdm << ',' << csv_num(r.bandwidth_hz) << ','
       << csv_num(r.latency_s) << ',' << csv_num(r.achievability) << ','
       << csv_num(r.converse) << ',' << r.n_samples << ',' << r.seed << ',' << r.cfg.n_tx
       << ',' << r.cfg.n_rx << ',' << r.cfg.n_subc << '\n';
}

void write_eexp_csv(std::ostream& os, const ExperimentPreset& p,
                    const std::vector<EexpRow>& rows) {
  os << csv_comment(p) << '\n'
     << "snr_db,eps_avg,eps_max,mu_star,n_samples,n_tx,n_rx,n_ofdm,n_res,n_subc,seed\n";
  for (const auto& r : rows)
    os << csv_num(r.cfg.snr_db) << ',' << csv_num(r.eps_avg) << ',' << csv_num(r.eps_max)
       << ',' << csv_num(r.mu_star) << ',' << r.n_samples << ',' << r.cfg.n_tx << ','
       << r.cfg.n_rx << ',' << r.cfg.n_ofdm << ',' << r.cfg.n_res << ',' << r.cfg.n_subc
       << ',' << r.seed << '\n';
}

void write_sim_csv(std::ostream& os, const ExperimentPreset& p,
                   const std::vector<SimResult>& rows) {
  os << csv_comment(p) << '\n' << "snr_db,np,packets,errors,per,ci_low,ci_high,seed\n";
  for (const auto& r : rows)
    os << csv_num(r.snr_db) << ',' << r.n_pilots << ',' << r.packets_run << ','
       << r.packet_errors << ',' << csv_num(r.per) << ',' << csv_num(r.ci_low) << ','
       << csv_num(r.ci_high) << ',' << r.seed << '\n';
}

}  // namespace fbl
