#include "weaves/grid.hpp"

#include "weaves/error.hpp"
#include "weaves/image.hpp"
#include "weaves/islands.hpp"
#include "weaves/serialize.hpp"

namespace weaves {

std::string_view to_string(GridEvent::Kind k) {
  switch (k) {
    case GridEvent::Kind::Checkpoint: return "checkpoint";
    case GridEvent::Kind::Restore: return "restore";
    case GridEvent::Kind::Migrate: return "migrate";
    case GridEvent::Kind::Kill: return "kill";
  }
  return "?";
}

Bytes GridCheckpoint::to_bytes() const {
  ByteWriter w;
  w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("WVGC"), 4));
  w.u32(1);
  w.u64(tick);
  w.u32(static_cast<std::uint32_t>(images.size()));
  for (std::size_t r = 0; r < images.size(); ++r) {
    w.bytes(images[r]);
    w.bytes(endpoints[r]);
    w.u32(placement[r].value);
  }
  w.bytes(clock);
  w.u64(dropped_in_flight);
  return std::move(w).take();
}

GridCheckpoint GridCheckpoint::from_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.raw(4);
  if (std::string(magic.begin(), magic.end()) != "WVGC" || r.u32() != 1)
    throw Error(ErrorCode::CorruptImage, "not a version 1 grid checkpoint");
  GridCheckpoint cp;
  cp.tick = r.u64();
  std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    cp.images.push_back(r.bytes());
    cp.endpoints.push_back(r.bytes());
    cp.placement.push_back(NodeId{r.u32()});
  }
  cp.clock = r.bytes();
  cp.dropped_in_flight = r.u64();
  if (!r.done()) throw Error(ErrorCode::CorruptImage, "trailing bytes in grid checkpoint");
  return cp;
}

/// A rank's view of the transport. Channels are addressed by rank, so the
/// node that hosts the rank never shows through.
class Grid::RankPort : public MessagePort {
 public:
  RankPort(Transport& t, std::uint32_t rank) : t_(t), rank_(rank) {}
  void send(std::uint32_t channel, Bytes payload) override {
    if (t_.channel(channel).src != rank_)
      throw Error(ErrorCode::UnknownChannel, "rank " + std::to_string(rank_) + " does not send on channel " +
                                                 std::to_string(channel));
    t_.send(channel, std::move(payload));
  }
  std::optional<Bytes> try_recv(std::uint32_t channel) override {
    if (t_.channel(channel).dst != rank_)
      throw Error(ErrorCode::UnknownChannel, "rank " + std::to_string(rank_) + " does not receive on channel " +
                                                 std::to_string(channel));
    return t_.try_recv(channel);
  }

 private:
  Transport& t_;
  std::uint32_t rank_;
};

Grid::Grid(GridConfig config)
    : config_(config), split_(partition_address_space(config.total_bits, config.vm_bits)), transport_(config.network) {
  if (config_.ranks == 0) throw Error(ErrorCode::InvalidArgument, "a grid needs at least one rank");
  if (config_.nodes == 0) config_.nodes = config_.ranks;
  if (config_.nodes < config_.ranks) throw Error(ErrorCode::InvalidArgument, "fewer nodes than ranks");
  if (config_.nodes > split_.max_nodes) throw Error(ErrorCode::InvalidSplit, "more nodes than the split allows");
  if (config_.steps_per_tick == 0) throw Error(ErrorCode::InvalidArgument, "steps_per_tick must be positive");
  for (std::uint32_t r = 0; r < config_.ranks; ++r) {
    RuntimeConfig rc;
    rc.scheduler = config_.scheduler;
    rc.scheduler.seed = config_.scheduler.seed + r;
    // A rank keeps its home region wherever it runs, so its addresses stay valid.
    rc.region = NodeRegion::for_node(NodeId{r}, split_);
    runtimes_.push_back(std::make_unique<Runtime>(rc));
    ports_.push_back(std::make_unique<RankPort>(transport_, r));
    runtimes_.back()->set_port(ports_.back().get());
    transport_.place(r, NodeId{r});
  }
}

Grid::~Grid() = default;

Runtime& Grid::rank(std::uint32_t r) {
  if (r >= runtimes_.size()) throw Error(ErrorCode::InvalidArgument, "no rank " + std::to_string(r));
  return *runtimes_[r];
}

const Runtime& Grid::rank(std::uint32_t r) const {
  if (r >= runtimes_.size()) throw Error(ErrorCode::InvalidArgument, "no rank " + std::to_string(r));
  return *runtimes_[r];
}

void Grid::connect_all() {
  for (std::uint32_t s = 0; s < config_.ranks; ++s)
    for (std::uint32_t d = 0; d < config_.ranks; ++d)
      if (s != d) transport_.add_channel(ChannelDecl{channel_id(s, d), s, d});
}

void Grid::kill(NodeId node) {
  if (node.value >= config_.nodes) throw Error(ErrorCode::InvalidArgument, "no node " + std::to_string(node.value));
  transport_.set_down(node, true);
  log_.push_back("tick=" + std::to_string(now()) + " event=kill node=" + std::to_string(node.value));
}

void Grid::apply_event(const GridEvent& e) {
  switch (e.kind) {
    case GridEvent::Kind::Checkpoint: {
      last_checkpoint_ = partial_checkpoint();
      log_.push_back("tick=" + std::to_string(now()) + " event=checkpoint dropped=" +
                     std::to_string(last_checkpoint_->dropped_in_flight));
      break;
    }
    case GridEvent::Kind::Restore: {
      if (!last_checkpoint_) throw Error(ErrorCode::MissingCheckpoint, "restore event without an earlier checkpoint");
      GridCheckpoint cp = *last_checkpoint_;
      restore(cp, e.remap);
      log_.push_back("tick=" + std::to_string(now()) + " event=restore from=" + std::to_string(cp.tick));
      break;
    }
    case GridEvent::Kind::Migrate: {
      Runtime& src = rank(e.from_rank);
      Runtime& dst = rank(e.to_rank);
      Island island;
      for (const auto& label : e.beads) {
        auto b = src.tapestry().find_bead(label);
        if (!b) throw Error(ErrorCode::UnknownBead, "rank " + std::to_string(e.from_rank) + " has no bead '" + label + "'");
        island.beads.insert(*b);
      }
      auto result = migrate_island(src, dst, island);
      log_.push_back("tick=" + std::to_string(now()) + " event=migrate from=" + std::to_string(e.from_rank) +
                     " to=" + std::to_string(e.to_rank) + " beads=" + std::to_string(result.beads.size()) +
                     " strings=" + std::to_string(result.strings.size()) + " bytes=" + std::to_string(result.bytes));
      break;
    }
    case GridEvent::Kind::Kill: kill(e.node); break;
  }
}

void Grid::tick() {
  const std::uint64_t t = now();
  for (const auto& e : events_)
    if (e.tick == t) apply_event(e);
  transport_.deliver_step();
  for (std::uint32_t r = 0; r < config_.ranks; ++r) {
    if (!alive(r)) continue;
    runtimes_[r]->wake_waiting();
    runtimes_[r]->run(config_.steps_per_tick);
  }
}

bool Grid::finished() const {
  for (std::uint32_t r = 0; r < config_.ranks; ++r) {
    if (!alive(r)) continue;
    for (const auto& s : runtimes_[r]->tapestry().strings())
      if (s.live()) return false;
  }
  return true;
}

bool Grid::run(std::uint64_t max_ticks) {
  for (std::uint64_t i = 0; i < max_ticks; ++i) {
    if (finished()) return true;
    tick();
  }
  return finished();
}

GridCheckpoint Grid::partial_checkpoint() {
  GridCheckpoint cp;
  cp.tick = now();
  for (std::uint32_t r = 0; r < config_.ranks; ++r) {
    cp.images.push_back(save_image(*runtimes_[r]));
    cp.endpoints.push_back(transport_.save_endpoints(r));
    cp.placement.push_back(node_of(r));
  }
  cp.clock = transport_.save_clock();
  cp.dropped_in_flight = transport_.in_flight();
  return cp;
}

void Grid::restore(const GridCheckpoint& cp, const std::map<std::uint32_t, NodeId>& remap) {
  if (cp.images.size() != config_.ranks) throw Error(ErrorCode::CorruptImage, "checkpoint rank count differs");
  transport_.clear_wire();
  transport_.load_clock(cp.clock);
  for (std::uint32_t r = 0; r < config_.ranks; ++r) {
    NodeId node = cp.placement[r];
    if (auto it = remap.find(r); it != remap.end()) node = it->second;
    if (node.value >= config_.nodes) throw Error(ErrorCode::InvalidArgument, "no node " + std::to_string(node.value));
    if (transport_.down(node)) throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(node.value) + " is down");
    transport_.place(r, node);
    load_image(*runtimes_[r], cp.images[r]);
    transport_.load_endpoints(r, cp.endpoints[r]);
  }
}

}  // namespace weaves
