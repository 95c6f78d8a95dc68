#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace p2pagg {

// Everything observable about one protocol round. Serializes to one JSON
// object per round with sorted keys, so equal-seed runs emit byte-identical
// streams. Wall-clock fields are written as 0.0 unless timing recording is
// switched on (timing is the one nondeterministic observable).

struct CheckRecord {
  std::string check;  // "binary" | "sign" | "unit"
  bool accepted = true;
  uint64_t revealed = 0;
  std::vector<uint16_t> flagged_clients;
  int reconstructions = 0;
};

struct RoundTranscript {
  uint64_t round = 0;
  std::vector<uint16_t> committee;       // elected roster, election order
  std::vector<uint64_t> sent_bytes;      // per peer id, payload bytes
  std::vector<uint64_t> recv_bytes;
  std::vector<CheckRecord> checks;
  std::vector<uint64_t> aggregate;       // revealed field values
  std::vector<uint16_t> dropped_clients;
  std::vector<uint16_t> dropped_members;
  std::vector<uint16_t> flagged_clients;
  std::vector<std::string> notes;        // e.g. unverified/corrected recon
  bool aborted = false;
  std::string abort_reason;
  bool record_timing = false;
  double client_seconds = 0;
  double share_seconds = 0;
  double check_seconds = 0;
  double aggregate_seconds = 0;
  std::vector<double> member_fr_seconds;  // per committee member

  // One NDJSON line (no trailing newline). Aggregates longer than 4096
  // values are folded into a hex digest to keep streams reviewable.
  std::string to_json_line() const;
};

struct SummaryRow {
  uint64_t round = 0;
  double accuracy = 0;
  uint64_t bytes_total = 0;
  double fr_cpu_seconds = 0;
  int aborts = 0;
  int flagged = 0;
};

std::string summary_csv_header();
std::string summary_csv_row(const SummaryRow& row, uint64_t seed,
                            const std::string& config_hash);

}  // namespace p2pagg
