#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "p2pagg/config.hpp"
#include "p2pagg/protocol.hpp"
#include "p2pagg/transcript.hpp"

namespace p2pagg {

struct SimResult {
  std::vector<RoundTranscript> transcripts;
  std::vector<std::pair<uint64_t, double>> accuracy;  // (round, test accuracy)
  std::vector<double> initial_w;
  std::vector<double> final_w;
  uint64_t total_bytes = 0;
  int aborted_rounds = 0;
  std::string config_hash;
  std::vector<RoundCapture> captures;  // filled when capture_rounds
};

// Drives the full deterministic round schedule from a parsed config:
// coin flip, election, dropouts, local training, attacks, sharing, checks,
// aggregation, broadcast, postprocess. Identical configs (and seeds) yield
// byte-identical transcript streams.
SimResult run_simulation(const Config& cfg, bool capture_rounds = false);

// transcript.ndjson and summary.csv under out_dir (created if needed).
void write_outputs(const SimResult& r, const Config& cfg,
                   const std::string& out_dir);

}  // namespace p2pagg
