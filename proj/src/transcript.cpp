#include "p2pagg/transcript.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "p2pagg/hash.hpp"

namespace p2pagg {

namespace {

using nlohmann::json;

// Fixed 6-decimal rendering so timing fields are byte-stable across
// platforms' shortest-round-trip printers.
json seconds_field(double s, bool record) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", record ? s : 0.0);
  return json::parse(buf);
}

std::string hex_digest(const Digest& d) {
  static const char* hex = "0123456789abcdef";
  std::string out(64, '0');
  for (size_t i = 0; i < d.size(); ++i) {
    out[2 * i] = hex[d[i] >> 4];
    out[2 * i + 1] = hex[d[i] & 15];
  }
  return out;
}

}  // namespace

std::string RoundTranscript::to_json_line() const {
  json j;
  j["round"] = round;
  j["committee"] = committee;
  j["sent_bytes"] = sent_bytes;
  j["recv_bytes"] = recv_bytes;
  json checks_j = json::array();
  for (const CheckRecord& c : checks) {
    json cj;
    cj["check"] = c.check;
    cj["accepted"] = c.accepted;
    cj["revealed"] = c.revealed;
    cj["flagged_clients"] = c.flagged_clients;
    cj["reconstructions"] = c.reconstructions;
    checks_j.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks_j);
  if (aggregate.size() <= 4096) {
    j["aggregate"] = aggregate;
  } else {
    Sha256 h;
    for (uint64_t v : aggregate) h.update_u64le(v);
    j["aggregate_sha256"] = hex_digest(h.finish());
    j["aggregate_len"] = aggregate.size();
  }
  j["dropped_clients"] = dropped_clients;
  j["dropped_members"] = dropped_members;
  j["flagged_clients"] = flagged_clients;
  j["notes"] = notes;
  j["aborted"] = aborted;
  j["abort_reason"] = abort_reason;
  j["client_seconds"] = seconds_field(client_seconds, record_timing);
  j["share_seconds"] = seconds_field(share_seconds, record_timing);
  j["check_seconds"] = seconds_field(check_seconds, record_timing);
  j["aggregate_seconds"] = seconds_field(aggregate_seconds, record_timing);
  json fr = json::array();
  for (double s : member_fr_seconds) fr.push_back(seconds_field(s, record_timing));
  j["member_fr_seconds"] = std::move(fr);
  return j.dump();  // nlohmann objects iterate sorted by key
}

std::string summary_csv_header() {
  return "round,accuracy,bytes_total,fr_cpu_seconds,aborts,flagged,seed,"
         "config_hash";
}

std::string summary_csv_row(const SummaryRow& row, uint64_t seed,
                            const std::string& config_hash) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%llu,%.6f,%llu,%.6f,%d,%d,%llu,%s",
                static_cast<unsigned long long>(row.round), row.accuracy,
                static_cast<unsigned long long>(row.bytes_total),
                row.fr_cpu_seconds, row.aborts, row.flagged,
                static_cast<unsigned long long>(seed), config_hash.c_str());
  return buf;
}

}  // namespace p2pagg
