#include "weaves/transport.hpp"

#include <algorithm>
#include <sstream>

#include "weaves/error.hpp"
#include "weaves/serialize.hpp"

namespace weaves {

Transport::Transport(NetworkConfig config) : config_(config), rng_(config.seed) {
  if (config_.min_delay == 0 || config_.max_delay < config_.min_delay)
    throw Error(ErrorCode::InvalidArgument, "need 1 <= min_delay <= max_delay");
  if (config_.retransmit_interval == 0 || config_.window == 0)
    throw Error(ErrorCode::InvalidArgument, "retransmit interval and window must be positive");
  if (!(config_.loss >= 0.0 && config_.loss < 1.0) || !(config_.duplicate >= 0.0 && config_.duplicate <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "loss must lie in [0,1), duplication in [0,1]");
}

void Transport::add_channel(ChannelDecl c) {
  if (index_.count(c.id)) throw Error(ErrorCode::InvalidDefinition, "channel " + std::to_string(c.id) + " declared twice");
  index_[c.id] = channels_.size();
  channels_.push_back(c);
  senders_.emplace_back();
  receivers_.emplace_back();
}

const ChannelDecl& Transport::channel(std::uint32_t id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownChannel, "channel " + std::to_string(id));
  return channels_[it->second];
}

void Transport::place(std::uint32_t rank, NodeId node) { placement_[rank] = node; }

NodeId Transport::node_of(std::uint32_t rank) const {
  auto it = placement_.find(rank);
  return it == placement_.end() ? NodeId{rank} : it->second;
}

void Transport::set_down(NodeId node, bool down) { down_[node] = down; }

bool Transport::down(NodeId node) const {
  auto it = down_.find(node);
  return it != down_.end() && it->second;
}

const SenderState& Transport::sender(std::uint32_t channel_id) const {
  (void)channel(channel_id);
  return senders_[index_.at(channel_id)];
}

const ReceiverState& Transport::receiver(std::uint32_t channel_id) const {
  (void)channel(channel_id);
  return receivers_[index_.at(channel_id)];
}

void Transport::transmit(const ChannelDecl& c, bool ack, std::uint64_t seq, const Bytes& payload) {
  ++stats_.sent;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> delay(config_.min_delay, config_.max_delay);
  Packet p;
  p.channel = c.id;
  p.src_node = node_of(ack ? c.dst : c.src);
  p.dst_node = node_of(ack ? c.src : c.dst);
  p.ack = ack;
  p.seq = seq;
  if (u(rng_) < config_.loss) {
    ++stats_.dropped;
    return;
  }
  p.payload = payload;
  p.deliver_at = now_ + delay(rng_);
  if (config_.duplicate > 0.0 && u(rng_) < config_.duplicate) {
    ++stats_.duplicated;
    Packet copy = p;
    copy.deliver_at = now_ + delay(rng_);
    wire_.push_back(std::move(copy));
  }
  wire_.push_back(std::move(p));
}

void Transport::fill_window(const ChannelDecl& c) {
  auto& s = senders_[index_.at(c.id)];
  while (s.unacked.size() < config_.window && !s.queued.empty()) {
    s.unacked.push_back(std::move(s.queued.front()));
    s.queued.pop_front();
    transmit(c, false, s.unacked.back().first, s.unacked.back().second);
    if (s.timer == 0) s.timer = config_.retransmit_interval;
  }
}

void Transport::send(std::uint32_t channel_id, Bytes payload) {
  const ChannelDecl& c = channel(channel_id);
  auto& s = senders_[index_.at(c.id)];
  s.queued.emplace_back(s.next_seq++, std::move(payload));
  fill_window(c);
}

std::optional<Bytes> Transport::try_recv(std::uint32_t channel_id) {
  (void)channel(channel_id);
  auto& r = receivers_[index_.at(channel_id)];
  if (r.inbox.empty()) return std::nullopt;
  Bytes b = std::move(r.inbox.front());
  r.inbox.pop_front();
  return b;
}

void Transport::on_data(const Packet& p) {
  const ChannelDecl& c = channel(p.channel);
  auto& r = receivers_[index_.at(c.id)];
  if (p.seq < r.expected || r.out_of_order.count(p.seq)) {
    ++r.duplicates;
    ++stats_.duplicates_suppressed;
  } else if (p.seq == r.expected) {
    r.inbox.push_back(p.payload);
    ++r.expected;
    ++stats_.delivered;
    for (auto it = r.out_of_order.find(r.expected); it != r.out_of_order.end(); it = r.out_of_order.find(r.expected)) {
      r.inbox.push_back(std::move(it->second));
      r.out_of_order.erase(it);
      ++r.expected;
      ++stats_.delivered;
    }
  } else {
    r.out_of_order.emplace(p.seq, p.payload);
  }
  transmit(c, true, r.expected - 1, {});
}

void Transport::on_ack(const Packet& p) {
  const ChannelDecl& c = channel(p.channel);
  auto& s = senders_[index_.at(c.id)];
  bool progress = false;
  while (!s.unacked.empty() && s.unacked.front().first <= p.seq) {
    s.unacked.pop_front();
    progress = true;
  }
  if (progress) s.timer = s.unacked.empty() ? 0 : config_.retransmit_interval;
  fill_window(c);
}

std::size_t Transport::deliver_step() {
  ++now_;
  const std::uint64_t before = stats_.delivered;
  std::vector<Packet> due;
  std::vector<Packet> later;
  for (auto& p : wire_) (p.deliver_at <= now_ ? due : later).push_back(std::move(p));
  wire_ = std::move(later);
  for (const auto& p : due) {
    if (down(p.dst_node)) {
      ++stats_.dropped;
      continue;
    }
    if (p.ack)
      on_ack(p);
    else
      on_data(p);
  }
  for (const auto& c : channels_) {
    auto& s = senders_[index_.at(c.id)];
    if (s.timer == 0 || down(node_of(c.src))) continue;
    if (--s.timer > 0) continue;
    // Go-back-N: resend everything still unacknowledged.
    for (const auto& [seq, payload] : s.unacked) {
      transmit(c, false, seq, payload);
      ++s.retransmissions;
      ++stats_.retransmissions;
    }
    s.timer = s.unacked.empty() ? 0 : config_.retransmit_interval;
  }
  return static_cast<std::size_t>(stats_.delivered - before);
}

bool Transport::quiescent() const {
  if (!wire_.empty()) return false;
  for (const auto& s : senders_)
    if (!s.unacked.empty() || !s.queued.empty()) return false;
  return true;
}

namespace {
void write_queue(ByteWriter& w, const std::deque<std::pair<std::uint64_t, Bytes>>& q) {
  w.u32(static_cast<std::uint32_t>(q.size()));
  for (const auto& [seq, payload] : q) {
    w.u64(seq);
    w.bytes(payload);
  }
}

std::deque<std::pair<std::uint64_t, Bytes>> read_queue(ByteReader& r) {
  std::deque<std::pair<std::uint64_t, Bytes>> q;
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint64_t seq = r.u64();
    q.emplace_back(seq, r.bytes());
  }
  return q;
}
}  // namespace

Bytes Transport::save_endpoints(std::uint32_t rank) const {
  ByteWriter w;
  std::uint32_t count = 0;
  for (const auto& c : channels_) count += (c.src == rank) + (c.dst == rank);
  w.u32(count);
  for (const auto& c : channels_) {
    std::size_t i = index_.at(c.id);
    if (c.src == rank) {
      const auto& s = senders_[i];
      w.u32(c.id);
      w.u8(0);
      w.u64(s.next_seq);
      write_queue(w, s.unacked);
      write_queue(w, s.queued);
      w.u32(s.timer);
      w.u64(s.retransmissions);
    }
    if (c.dst == rank) {
      const auto& r = receivers_[i];
      w.u32(c.id);
      w.u8(1);
      w.u64(r.expected);
      w.u32(static_cast<std::uint32_t>(r.out_of_order.size()));
      for (const auto& [seq, payload] : r.out_of_order) {
        w.u64(seq);
        w.bytes(payload);
      }
      w.u32(static_cast<std::uint32_t>(r.inbox.size()));
      for (const auto& payload : r.inbox) w.bytes(payload);
      w.u64(r.duplicates);
    }
  }
  return std::move(w).take();
}

void Transport::load_endpoints(std::uint32_t rank, std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t id = r.u32();
    std::uint8_t half = r.u8();
    const ChannelDecl& c = channel(id);
    std::size_t i = index_.at(id);
    if (half == 0) {
      if (c.src != rank) throw Error(ErrorCode::CorruptImage, "sender state for a channel the rank does not send on");
      SenderState s;
      s.next_seq = r.u64();
      s.unacked = read_queue(r);
      s.queued = read_queue(r);
      s.timer = r.u32();
      s.retransmissions = r.u64();
      senders_[i] = std::move(s);
    } else {
      if (c.dst != rank) throw Error(ErrorCode::CorruptImage, "receiver state for a channel the rank does not receive on");
      ReceiverState st;
      st.expected = r.u64();
      std::uint32_t n = r.u32();
      for (std::uint32_t j = 0; j < n; ++j) {
        std::uint64_t seq = r.u64();
        st.out_of_order.emplace(seq, r.bytes());
      }
      n = r.u32();
      for (std::uint32_t j = 0; j < n; ++j) st.inbox.push_back(r.bytes());
      st.duplicates = r.u64();
      receivers_[i] = std::move(st);
    }
  }
}

Bytes Transport::save_clock() const {
  ByteWriter w;
  w.u64(now_);
  std::ostringstream os;
  os << rng_;
  w.str(os.str());
  return std::move(w).take();
}

void Transport::load_clock(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  now_ = r.u64();
  std::istringstream is(r.str());
  is >> rng_;
  if (!is) throw Error(ErrorCode::CorruptImage, "bad random state");
}

}  // namespace weaves
