#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "p2pagg/bench.hpp"
#include "p2pagg/committee.hpp"
#include "p2pagg/config.hpp"
#include "p2pagg/errors.hpp"
#include "p2pagg/simulator.hpp"

namespace {

using namespace p2pagg;

constexpr int kExitAbort = 2;    // a round aborted under the abort policy
constexpr int kExitConfig = 64;  // bad config or flags
constexpr int kExitIo = 74;      // filesystem failure

void apply_overrides(Config& cfg, const std::vector<std::string>& kvs) {
  for (const std::string& kv : kvs) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override must be section.key=value: '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path.string());
  f << text;
  if (!f.good()) throw IoError("write failed: " + path.string());
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<int64_t> seed,
            const std::vector<std::string>& overrides) {
  Config cfg = Config::parse_file(config_path);
  apply_overrides(cfg, overrides);
  if (seed) cfg.set("sim.seed", std::to_string(*seed));
  const SimResult res = run_simulation(cfg);
  write_outputs(res, cfg, out_dir);
  std::cout << "rounds=" << res.transcripts.size()
            << " aborted=" << res.aborted_rounds
            << " bytes=" << res.total_bytes;
  if (!res.accuracy.empty())
    std::cout << " accuracy=" << res.accuracy.back().second;
  std::cout << " config=" << res.config_hash << " outputs=" << out_dir
            << std::endl;
  return res.aborted_rounds > 0 ? kExitAbort : 0;
}

int cmd_bench(const std::string& protocol, std::vector<size_t> dims,
              std::vector<size_t> peers, int trials, uint64_t seed,
              const std::string& out_dir) {
  if (dims.empty()) dims = {1000, 10000, 100000};
  if (peers.empty()) peers = {100, 500, 1000};
  std::vector<std::string> protos =
      protocol == "all" ? std::vector<std::string>{"rsa", "cc", "flt"}
                        : std::vector<std::string>{protocol};
  std::vector<BenchCell> cells;
  for (const std::string& p : protos) {
    auto part = run_bench(p, dims, peers, trials, seed, Mode::Parallel);
    cells.insert(cells.end(), part.begin(), part.end());
  }
  const std::string csv = bench_csv(cells);
  std::cout << csv;
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);
    write_text(std::filesystem::path(out_dir) / "bench.csv", csv);
  }
  return 0;
}

int cmd_committee_size(const std::string& p, const std::string& threshold,
                       int bits, const std::string& dropout) {
  CommitteePolicy policy;
  policy.p = parse_rational(p);
  policy.threshold_frac = parse_rational(threshold);
  policy.security_bits = bits;
  policy.dropout_frac = parse_rational(dropout);
  std::cout << min_committee_size_with_dropout(policy) << std::endl;
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::optional<int64_t> seed,
              const std::vector<std::string>& overrides) {
  Config base = Config::parse_file(config_path);
  apply_overrides(base, overrides);
  if (seed) base.set("sim.seed", std::to_string(*seed));
  const auto protos = split_list(base.get_string("sweep.protocols", "rsa,cc,flt"));
  const auto attacks = split_list(base.get_string("sweep.attacks", "none"));
  const auto fs = split_list(base.get_string("sweep.f", "0"));
  if (protos.empty() || attacks.empty() || fs.empty())
    throw ConfigError("empty sweep grid");

  std::ostringstream csv;
  csv << "protocol,attack,f,seed,rounds,aborted,final_accuracy,bytes,"
         "config_hash,status\n";
  size_t completed = 0;
  for (const std::string& proto : protos)
    for (const std::string& attack : attacks)
      for (const std::string& f : fs) {
        Config cfg = base;
        cfg.set("sim.protocol", proto);
        cfg.set("attack.kind", attack);
        cfg.set("attack.f", attack == "none" ? "0" : f);
        csv << proto << ',' << attack << ',' << f << ','
            << cfg.get_int("sim.seed", 1) << ',';
        try {
          const SimResult res = run_simulation(cfg);
          const double acc =
              res.accuracy.empty() ? 0.0 : res.accuracy.back().second;
          csv << res.transcripts.size() << ',' << res.aborted_rounds << ','
              << acc << ',' << res.total_bytes << ',' << res.config_hash
              << ",ok\n";
          ++completed;
          std::cout << proto << '/' << attack << "/f=" << f
                    << " accuracy=" << acc << std::endl;
        } catch (const Error& e) {
          std::string why = e.what();
          for (char& c : why)
            if (c == ',' || c == '\n') c = ';';
          csv << "0,0,0,0,," << "error:" << why << '\n';
          std::cout << proto << '/' << attack << "/f=" << f
                    << " failed: " << e.what() << std::endl;
        }
      }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);
  write_text(std::filesystem::path(out_dir) / "sweep.csv", csv.str());
  std::cout << "cells=" << protos.size() * attacks.size() * fs.size()
            << " completed=" << completed << " outputs=" << out_dir
            << std::endl;
  return completed > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"committee-sharded robust aggregation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<int64_t> seed;
  std::vector<std::string> overrides;

  CLI::App* run = app.add_subcommand("run", "run one experiment from a config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--seed", seed, "override sim.seed");
  run->add_option("--params", overrides,
                  "config overrides, section.key=value")
      ->delimiter(',');

  std::string protocol = "all";
  std::vector<size_t> dims;
  std::vector<size_t> peers;
  int trials = 3;
  uint64_t bench_seed = 1;
  std::string bench_out;
  CLI::App* bench = app.add_subcommand(
      "bench", "time one committee member's aggregation step");
  bench->add_option("--protocol", protocol, "rsa|cc|flt|all");
  bench->add_option("--params", dims, "model lengths d")->delimiter(',');
  bench->add_option("--peers", peers, "client counts n")->delimiter(',');
  bench->add_option("--trials", trials, "trials per cell");
  bench->add_option("--seed", bench_seed, "input seed");
  bench->add_option("--out", bench_out, "directory for bench.csv");

  std::string cs_p;
  std::string cs_threshold;
  int cs_bits = 40;
  std::string cs_dropout = "0";
  CLI::App* cs = app.add_subcommand(
      "committee-size", "minimum committee size for a corruption bound");
  cs->add_option("--p", cs_p, "adversarial fraction, e.g. 0.1 or 1/10")
      ->required();
  cs->add_option("--threshold", cs_threshold, "tolerated fraction, 1/2 or 1/3")
      ->required();
  cs->add_option("--bits", cs_bits, "security bits");
  cs->add_option("--dropout", cs_dropout, "member dropout fraction");

  std::string sweep_config;
  std::string sweep_out = "sweep_out";
  std::optional<int64_t> sweep_seed;
  std::vector<std::string> sweep_overrides;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "cartesian protocol x attack x f sweep");
  sweep->add_option("--config", sweep_config, "base config with a [sweep] section")
      ->required();
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--seed", sweep_seed, "override sim.seed");
  sweep->add_option("--params", sweep_overrides,
                    "config overrides, section.key=value")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed, overrides);
    if (bench->parsed())
      return cmd_bench(protocol, dims, peers, trials, bench_seed, bench_out);
    if (cs->parsed())
      return cmd_committee_size(cs_p, cs_threshold, cs_bits, cs_dropout);
    if (sweep->parsed())
      return cmd_sweep(sweep_config, sweep_out, sweep_seed, sweep_overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << std::endl;
    return kExitIo;
  } catch (const AbortError& e) {
    std::cerr << "aborted: " << e.what() << std::endl;
    return kExitAbort;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
