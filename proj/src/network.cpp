#include "p2pagg/network.hpp"

#include "p2pagg/errors.hpp"

namespace p2pagg {

Mailbox::Mailbox(size_t peers)
    : queues_(peers), sent_(peers, 0), recv_(peers, 0) {}

void Mailbox::send(uint16_t from, uint16_t to, uint8_t phase,
                   std::vector<uint8_t> payload) {
  check(from < queues_.size() && to < queues_.size(), "peer id out of range");
  sent_[from] += payload.size();
  queues_[to].push_back(Message{from, phase, std::move(payload)});
}

std::vector<Message> Mailbox::drain(uint16_t peer, uint8_t phase) {
  check(peer < queues_.size(), "peer id out of range");
  std::vector<Message> out;
  auto& q = queues_[peer];
  out.reserve(q.size());
  while (!q.empty()) {
    check(q.front().phase == phase, "phase interleaving in mailbox");
    recv_[peer] += q.front().payload.size();
    out.push_back(std::move(q.front()));
    q.pop_front();
  }
  return out;
}

void Mailbox::account(uint16_t peer, uint64_t sent, uint64_t recv) {
  check(peer < queues_.size(), "peer id out of range");
  sent_[peer] += sent;
  recv_[peer] += recv;
}

void Mailbox::reset_counters() {
  sent_.assign(sent_.size(), 0);
  recv_.assign(recv_.size(), 0);
}

}  // namespace p2pagg
