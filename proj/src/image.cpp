#include "weaves/image.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "weaves/error.hpp"
#include "weaves/runtime.hpp"
#include "weaves/serialize.hpp"

namespace weaves {

namespace {
constexpr char kMagic[4] = {'W', 'V', 'C', 'K'};

ByteReader open(std::span<const std::uint8_t> image) {
  ByteReader r(image);
  auto magic = r.raw(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw Error(ErrorCode::CorruptImage, "bad magic");
  std::uint32_t version = r.u32();
  if (version != kImageVersion)
    throw Error(ErrorCode::CorruptImage, "unsupported image version " + std::to_string(version));
  return r;
}
}  // namespace

Bytes save_image(const Runtime& rt, std::string_view config_text) {
  ByteWriter w;
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.u32(kImageVersion);

  const Memory& mem = rt.memory();
  auto sec = w.begin_section();
  w.u32(static_cast<std::uint32_t>(mem.cell_count()));
  for (std::size_t i = 0; i < mem.cell_count(); ++i) {
    const Cell& c = mem.cell(CellId{static_cast<std::uint32_t>(i)});
    w.u32(c.owner.value);
    w.u64(c.address);
    w.u8(c.live);
    w.u8(c.heap);
    w.bytes(c.value);
  }
  w.end_section(sec);

  sec = w.begin_section();
  w.u64(mem.next_sequence());
  w.u64(mem.region().cursor());
  w.u32(static_cast<std::uint32_t>(mem.allocations().size()));
  for (const auto& a : mem.allocations()) {
    w.u32(a.bead.value);
    w.u64(a.start);
    w.u64(a.size);
    w.u64(a.sequence);
    w.u8(a.live);
    w.u32(a.cell.value);
    w.u32(a.by_string.value);
  }
  w.end_section(sec);

  sec = w.begin_section();
  const auto& strings = rt.tapestry().strings();
  w.u32(static_cast<std::uint32_t>(strings.size()));
  for (const auto& s : strings) {
    w.u32(s.id.value);
    w.u8(static_cast<std::uint8_t>(s.state.status));
    w.u64(s.steps);
    w.u64(s.state.frame.pc);
    w.u32(static_cast<std::uint32_t>(s.state.frame.locals.size()));
    for (const auto& [name, value] : s.state.frame.locals) {
      w.str(name);
      w.bytes(value);
    }
    w.u32(s.state.shared_depth);
    w.u32(static_cast<std::uint32_t>(s.state.bead_stack.size()));
    for (const auto& f : s.state.bead_stack) {
      w.u32(f.bead.value);
      w.u8(f.shared);
    }
    w.u32(s.state.blocked_on.value);
  }
  w.end_section(sec);

  sec = w.begin_section();
  w.raw(rt.locks().serialize());
  w.end_section(sec);

  sec = w.begin_section();
  w.str(config_text);
  w.end_section(sec);
  return std::move(w).take();
}

void load_image(Runtime& rt, std::span<const std::uint8_t> image) {
  ByteReader r = open(image);

  ByteReader cells_in = r.section();
  std::vector<Cell> cells(cells_in.u32());
  for (auto& c : cells) {
    c.owner = BeadId{cells_in.u32()};
    c.address = cells_in.u64();
    c.live = cells_in.u8() != 0;
    c.heap = cells_in.u8() != 0;
    c.value = cells_in.bytes();
  }

  ByteReader allocs_in = r.section();
  std::uint64_t next_sequence = allocs_in.u64();
  Address cursor = allocs_in.u64();
  std::vector<AllocationRecord> allocs(allocs_in.u32());
  for (auto& a : allocs) {
    a.bead = BeadId{allocs_in.u32()};
    a.start = allocs_in.u64();
    a.size = allocs_in.u64();
    a.sequence = allocs_in.u64();
    a.live = allocs_in.u8() != 0;
    a.cell = CellId{allocs_in.u32()};
    a.by_string = StringId{allocs_in.u32()};
    if (a.cell.index() >= cells.size()) throw Error(ErrorCode::CorruptImage, "allocation refers to a missing cell");
  }

  ByteReader res_in = r.section();
  auto& strings = rt.tapestry().strings_mut();
  std::uint32_t n = res_in.u32();
  if (n != strings.size())
    throw Error(ErrorCode::CorruptImage, "image has " + std::to_string(n) + " strings, runtime has " +
                                             std::to_string(strings.size()));
  std::vector<std::pair<Resumption, std::uint64_t>> states(n);
  for (auto& [st, steps] : states) {
    if (res_in.u32() >= n) throw Error(ErrorCode::CorruptImage, "string id out of range");
    std::uint8_t status = res_in.u8();
    if (status > static_cast<std::uint8_t>(StringStatus::Detached)) throw Error(ErrorCode::CorruptImage, "bad status");
    st.status = static_cast<StringStatus>(status);
    steps = res_in.u64();
    st.frame.pc = res_in.u64();
    std::uint32_t locals = res_in.u32();
    for (std::uint32_t i = 0; i < locals; ++i) {
      std::string name = res_in.str();
      st.frame.locals.emplace(std::move(name), res_in.bytes());
    }
    st.shared_depth = res_in.u32();
    std::uint32_t depth = res_in.u32();
    for (std::uint32_t i = 0; i < depth; ++i) {
      BeadFrame f;
      f.bead = BeadId{res_in.u32()};
      f.shared = res_in.u8() != 0;
      st.bead_stack.push_back(f);
    }
    st.blocked_on = LockId{res_in.u32()};
  }
  ByteReader locks_in = r.section();
  auto lock_bytes = locks_in.raw(locks_in.remaining());
  Bytes locks(lock_bytes.begin(), lock_bytes.end());
  (void)r.section();

  // Everything parsed; commit.
  for (CheckpointId id : rt.checkpoints().live_ids()) rt.checkpoints().discard(id);
  rt.memory().load_state(std::move(cells), std::move(allocs), next_sequence, cursor);
  for (std::uint32_t i = 0; i < n; ++i) {
    strings[i].state = std::move(states[i].first);
    strings[i].steps = states[i].second;
  }
  rt.locks().load(locks);
  rt.locks().history().clear();
  rt.invalidate();
}

std::string image_config(std::span<const std::uint8_t> image) {
  ByteReader r = open(image);
  for (int i = 0; i < 4; ++i) (void)r.section();
  ByteReader c = r.section();
  return c.str();
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::InvalidArgument, "write to '" + path + "' failed");
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace weaves
