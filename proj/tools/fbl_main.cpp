// Command-line front end: bounds | eexp | simulate | presets.
//
// Exit status: 0 success, 1 usage or configuration error, 2 numerical
// failure (sampling breakdown, nonmonotone curve, unbracketed search).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "fbl/bounds.hpp"
#include "fbl/experiment.hpp"
#include "fbl/matrix_kernels.hpp"

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path preset_dir() {
  if (const char* env = std::getenv("FBL_PRESET_DIR"); env && *env) return env;
  return FBL_PRESET_DIR;
}

fs::path preset_path(const std::string& name) {
  const fs::path p = preset_dir() / (name + ".cfg");
  if (!fs::exists(p))
    throw UsageError("no preset named '" + name + "' in " + preset_dir().string());
  return p;
}

struct RunFlags {
  std::string config, preset, out;
  int threads = 0;
  // flag name -> value, only for flags the user gave
  std::map<std::string, std::string> given;
};

// Flags that map one-to-one onto experiment keys.
const std::map<std::string, std::string> kFlagKeys = {
    {"link", "link"},          {"ntx", "n_tx"},
    {"nrx", "n_rx"},           {"nofdm", "n_ofdm"},
    {"nres", "n_res"},         {"nsubc", "n_subc"},
    {"subcarriers-per-packet", "subcarriers_per_packet"},
    {"epsilon", "epsilon"},    {"samples", "samples"},
    {"seed", "seed"},          {"snr-min", "snr_min"},
    {"snr-max", "snr_max"},    {"snr-step", "snr_step"},
    {"kbits", "k_bits"},       {"np", "n_pilots"},
    {"min-errors", "min_errors"}, {"max-packets", "max_packets"},
    {"order", "osd_order"},    {"kinfo", "k_info"},
    {"memory", "memory"},      {"generators", "generators"},
    {"interleave", "interleave_rbs"},
};

CLI::App* add_run_command(CLI::App& app, const std::string& name,
                          const std::string& help, RunFlags& f) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", f.config, "key=value experiment file");
  sub->add_option("--preset", f.preset, "named preset (see `fbl presets`)");
  sub->add_option("--threads", f.threads, "worker threads, 0 = OpenMP default")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", f.out, "write CSV here instead of standard output");
  for (const auto& [flag, key] : kFlagKeys)
    sub->add_option_function<std::string>(
        "--" + flag, [&f, flag = flag](const std::string& v) { f.given[flag] = v; },
        "sets " + key);
  sub->add_option_function<std::string>(
      "--snr", [&f](const std::string& v) { f.given["snr"] = v; },
      "SNR in dB (a single grid point for eexp and simulate)");
  return sub;
}

fbl::ExperimentPreset resolve(fbl::Command cmd, const RunFlags& f) {
  if (!f.config.empty() && !f.preset.empty())
    throw UsageError("--config and --preset are mutually exclusive");
  fbl::KeyValues kv;
  if (!f.preset.empty()) kv = fbl::read_key_values_file(preset_path(f.preset).string());
  if (!f.config.empty()) kv = fbl::read_key_values_file(f.config);
  if (auto it = kv.find("command"); it != kv.end() && it->second != fbl::to_string(cmd))
    throw UsageError("experiment file is for '" + it->second + "', not '" +
                     fbl::to_string(cmd) + "'");
  kv["command"] = fbl::to_string(cmd);
  for (const auto& [flag, value] : f.given) {
    if (flag == "snr") {
      if (cmd == fbl::Command::bounds) {
        kv["snr_db"] = value;
      } else {
        kv["snr_min"] = kv["snr_max"] = value;
      }
      continue;
    }
    kv[kFlagKeys.at(flag)] = value;
  }
  if (f.given.count("nsubc") && !f.given.count("subcarriers-per-packet"))
    kv.erase("subcarriers_per_packet");
  return fbl::parse_experiment(kv);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + out + "'");
  f << text;
  if (!f.flush()) throw std::runtime_error("write to '" + out + "' failed");
}

void list_presets(const std::string& name) {
  if (!name.empty()) {
    std::ifstream f(preset_path(name));
    std::cout << f.rdbuf();
    return;
  }
  std::map<std::string, std::string> found;
  for (const auto& e : fs::directory_iterator(preset_dir())) {
    if (e.path().extension() != ".cfg") continue;
    std::ifstream f(e.path());
    std::string first;
    std::getline(f, first);
    if (first.rfind("# ", 0) == 0) first.erase(0, 2);
    found[e.path().stem().string()] = first;
  }
  for (const auto& [n, d] : found) std::cout << n << "  " << d << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-blocklength rate bounds, error-exponent bounds and coded link simulation"};
  app.set_version_flag("--version", std::string("fbl ") + fbl::kVersion);
  app.require_subcommand(1);

  RunFlags bf, ef, sf;
  CLI::App* bounds = add_run_command(app, "bounds", "achievability and converse rate sweep", bf);
  CLI::App* eexp = add_run_command(app, "eexp", "error-exponent bound over an SNR grid", ef);
  CLI::App* sim = add_run_command(app, "simulate", "packet error rate of the coded link", sf);
  std::string preset_name;
  CLI::App* presets = app.add_subcommand("presets", "list presets, or print one");
  presets->add_option("name", preset_name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    std::ostringstream csv;
    if (presets->parsed()) {
      list_presets(preset_name);
      return 0;
    }
    if (bounds->parsed()) {
      const auto p = resolve(fbl::Command::bounds, bf);
      fbl::write_bounds_csv(csv, p, fbl::run_bounds(p, bf.threads));
      emit(csv.str(), bf.out);
    } else if (eexp->parsed()) {
      const auto p = resolve(fbl::Command::eexp, ef);
      fbl::write_eexp_csv(csv, p, fbl::run_eexp(p, ef.threads));
      emit(csv.str(), ef.out);
    } else if (sim->parsed()) {
      const auto p = resolve(fbl::Command::simulate, sf);
      fbl::write_sim_csv(csv, p, fbl::run_simulate(p, sf.threads));
      emit(csv.str(), sf.out);
    }
    return 0;
  } catch (const fbl::NumericalError& e) {
    std::cerr << "fbl: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const fbl::SamplingError& e) {
    std::cerr << "fbl: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const fbl::BracketError& e) {
    std::cerr << "fbl: numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fbl: " << e.what() << '\n';
    return 1;
  }
}
