#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "weaves/ids.hpp"

namespace weaves {

struct NetworkConfig {
  double loss = 0.0;       // per-packet drop probability (data and acks)
  double duplicate = 0.0;  // per-packet duplication probability
  std::uint32_t min_delay = 1;
  std::uint32_t max_delay = 1;
  std::uint32_t retransmit_interval = 8;  // ticks
  std::uint32_t window = 32;              // unacknowledged packets per channel
  std::uint64_t seed = 1;
};

/// Directed logical link between two ranks. Ranks are the endpoint
/// identities applications see; the node hosting a rank may change.
struct ChannelDecl {
  std::uint32_t id = 0;
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
};

struct Packet {
  std::uint32_t channel = 0;
  NodeId src_node;
  NodeId dst_node;
  bool ack = false;
  std::uint64_t seq = 0;  // data: sequence number; ack: highest in-order sequence received
  Bytes payload;
  std::uint64_t deliver_at = 0;
};

/// Sender half of a channel endpoint.
struct SenderState {
  std::uint64_t next_seq = 1;
  std::deque<std::pair<std::uint64_t, Bytes>> unacked;  // transmitted, not yet acknowledged
  std::deque<std::pair<std::uint64_t, Bytes>> queued;   // waiting for window space
  std::uint32_t timer = 0;                               // ticks until retransmission; 0 = disarmed
  std::uint64_t retransmissions = 0;

  friend bool operator==(const SenderState&, const SenderState&) = default;
};

/// Receiver half of a channel endpoint.
struct ReceiverState {
  std::uint64_t expected = 1;
  std::map<std::uint64_t, Bytes> out_of_order;
  std::deque<Bytes> inbox;  // delivered in order, not yet consumed
  std::uint64_t duplicates = 0;

  friend bool operator==(const ReceiverState&, const ReceiverState&) = default;
};

struct TransportStats {
  std::uint64_t sent = 0;
  std::uint64_t dropped = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t delivered = 0;  // to inboxes
  std::uint64_t retransmissions = 0;
  std::uint64_t duplicates_suppressed = 0;
};

/// Discrete-tick unreliable network plus the reliability layer on top of
/// it: per-channel sequence numbers, cumulative acknowledgements, a sliding
/// window and interval-timed retransmission.
class Transport {
 public:
  explicit Transport(NetworkConfig config = {});

  void add_channel(ChannelDecl c);
  const std::vector<ChannelDecl>& channels() const { return channels_; }
  const ChannelDecl& channel(std::uint32_t id) const;

  /// Rank -> hosting node. Defaults to the identity.
  void place(std::uint32_t rank, NodeId node);
  NodeId node_of(std::uint32_t rank) const;
  void set_down(NodeId node, bool down);
  bool down(NodeId node) const;

  /// Reliable send from the channel's source rank. Throws UnknownChannel.
  void send(std::uint32_t channel, Bytes payload);
  /// Next in-order payload at the channel's destination, if any.
  std::optional<Bytes> try_recv(std::uint32_t channel);

  /// Advances one tick: delivers due packets, acknowledges, runs timers.
  /// Returns the number of payloads that reached inboxes.
  std::size_t deliver_step();

  std::uint64_t now() const { return now_; }
  std::size_t in_flight() const { return wire_.size(); }
  bool quiescent() const;
  const TransportStats& stats() const { return stats_; }
  const SenderState& sender(std::uint32_t channel) const;
  const ReceiverState& receiver(std::uint32_t channel) const;

  /// Endpoint state of every channel touching `rank` (both halves where
  /// the rank is the respective end). In-flight packets are not included.
  Bytes save_endpoints(std::uint32_t rank) const;
  void load_endpoints(std::uint32_t rank, std::span<const std::uint8_t> bytes);
  /// Clock and random state, so a restored grid resumes the same schedule.
  Bytes save_clock() const;
  void load_clock(std::span<const std::uint8_t> bytes);
  /// Drops everything on the wire.
  void clear_wire() { wire_.clear(); }

 private:
  void transmit(const ChannelDecl& c, bool ack, std::uint64_t seq, const Bytes& payload);
  void fill_window(const ChannelDecl& c);
  void on_data(const Packet& p);
  void on_ack(const Packet& p);

  NetworkConfig config_;
  std::mt19937_64 rng_;
  std::uint64_t now_ = 0;
  std::vector<ChannelDecl> channels_;
  std::map<std::uint32_t, std::size_t> index_;
  std::vector<SenderState> senders_;
  std::vector<ReceiverState> receivers_;
  std::map<std::uint32_t, NodeId> placement_;
  std::map<NodeId, bool> down_;
  std::vector<Packet> wire_;
  TransportStats stats_;
};

}  // namespace weaves
