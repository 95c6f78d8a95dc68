#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace p2pagg {

// Deterministic in-process message fabric. Delivery order is exactly enqueue
// order per receiver, and byte counters track payload bytes only (the framing
// of a real transport is not modeled). Committee-internal exchanges whose
// results the simulator computes in place are accounted separately.

enum : uint8_t {
  kPhaseCommit = 0,
  kPhaseOpen = 1,
  kPhaseShare = 2,
  kPhaseReveal = 3,
};

struct Message {
  uint16_t from = 0;
  uint8_t phase = 0;
  std::vector<uint8_t> payload;
};

class Mailbox {
 public:
  explicit Mailbox(size_t peers);

  void send(uint16_t from, uint16_t to, uint8_t phase,
            std::vector<uint8_t> payload);
  // Pops every queued message for `peer`; all must carry `phase` (the round
  // scheduler never interleaves phases).
  std::vector<Message> drain(uint16_t peer, uint8_t phase);

  // Adds committee-internal traffic that is not routed through queues.
  void account(uint16_t peer, uint64_t sent, uint64_t recv);

  const std::vector<uint64_t>& sent_bytes() const { return sent_; }
  const std::vector<uint64_t>& recv_bytes() const { return recv_; }
  void reset_counters();

 private:
  std::vector<std::deque<Message>> queues_;
  std::vector<uint64_t> sent_, recv_;
};

}  // namespace p2pagg
