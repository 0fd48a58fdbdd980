// Copyright 2026 The mudguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mudguard/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mudguard/error.hpp"

namespace mudguard {

namespace {

constexpr std::uint32_t kPcapMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kPcapMagicNano = 0xa1b23c4d;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::size_t kPcapHeader = 24;
constexpr std::size_t kRecordHeader = 16;

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size() && !s.empty();
}

std::uint32_t read32(const unsigned char* p, bool swap) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return swap ? __builtin_bswap32(v) : v;
}

void append32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), 4);
}

void append16(std::string& out, std::uint16_t v) {
  out.append(reinterpret_cast<const char*>(&v), 2);
}

}  // namespace

const char* to_string(TraceDirection d) noexcept {
  return d == TraceDirection::outgoing ? "outgoing" : "incoming";
}

const char* to_string(TraceProtocol p) noexcept {
  switch (p) {
    case TraceProtocol::tcp: return "tcp";
    case TraceProtocol::udp: return "udp";
    case TraceProtocol::icmp: return "icmp";
    case TraceProtocol::other: return "other";
  }
  return "?";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path + "'");
}

std::vector<TraceRecord> parse_trace_csv(std::string_view text) {
  std::vector<TraceRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && line.substr(0, 9) == "timestamp") continue;

    auto fail = [&](const std::string& why) {
      throw Error(ErrorKind::parse,
                  "trace line " + std::to_string(line_no) + ": " + why);
    };
    auto cols = split(line, ',');
    for (auto& c : cols) c = trim(c);
    if (cols.size() != 5 && cols.size() != 9 && cols.size() != 10) {
      fail("expected 5, 9 or 10 columns, got " + std::to_string(cols.size()));
    }

    TraceRecord r;
    std::uint64_t ts = 0;
    if (!parse_uint(cols[0], ts)) fail("bad timestamp '" + std::string(cols[0]) + "'");
    r.timestamp = Nanoseconds(static_cast<std::int64_t>(ts));
    r.device_id = std::string(cols[1]);
    if (r.device_id.empty()) fail("empty device_id");
    if (cols[2] == "outgoing") {
      r.direction = TraceDirection::outgoing;
    } else if (cols[2] == "incoming") {
      r.direction = TraceDirection::incoming;
    } else {
      fail("bad direction '" + std::string(cols[2]) + "'");
    }
    if (cols[3] == "tcp") {
      r.protocol = TraceProtocol::tcp;
    } else if (cols[3] == "udp") {
      r.protocol = TraceProtocol::udp;
    } else if (cols[3] == "icmp") {
      r.protocol = TraceProtocol::icmp;
    } else if (cols[3] == "other") {
      r.protocol = TraceProtocol::other;
    } else {
      fail("bad protocol '" + std::string(cols[3]) + "'");
    }
    if (!parse_uint(cols[4], r.length) || r.length == 0) {
      fail("length must be a positive integer");
    }
    if (cols.size() >= 9) {
      r.src = IpAddress::parse(cols[5]);
      r.dst = IpAddress::parse(cols[6]);
      if (!r.src || !r.dst) fail("bad address");
      if (r.src->family() != r.dst->family()) fail("addresses mix families");
      if (!parse_uint(cols[7], r.src_port) || !parse_uint(cols[8], r.dst_port)) {
        fail("bad port");
      }
    }
    if (cols.size() == 10) {
      unsigned flags = 0;
      auto [p, ec] = std::from_chars(cols[9].data(), cols[9].data() + cols[9].size(), flags, 16);
      if (ec != std::errc{} || p != cols[9].data() + cols[9].size() || flags > 0xff) {
        fail("bad tcp_flags (hex byte expected)");
      }
      r.tcp_flags = static_cast<std::uint8_t>(flags);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TraceRecord> load_trace_csv(const std::string& path) {
  return parse_trace_csv(read_file(path));
}

std::string format_trace_csv(const std::vector<TraceRecord>& records) {
  const bool full = std::any_of(records.begin(), records.end(),
                                [](const TraceRecord& r) { return r.src && r.dst; });
  std::string out = full ? "timestamp_ns,device_id,direction,protocol,length,"
                           "src,dst,src_port,dst_port,tcp_flags\n"
                         : "timestamp_ns,device_id,direction,protocol,length\n";
  char flags[8];
  for (const auto& r : records) {
    out += std::to_string(r.timestamp.count());
    out += ',';
    out += r.device_id;
    out += ',';
    out += to_string(r.direction);
    out += ',';
    out += to_string(r.protocol);
    out += ',';
    out += std::to_string(r.length);
    if (r.src && r.dst) {
      std::snprintf(flags, sizeof flags, "%02x", r.tcp_flags);
      out += ',' + r.src->to_string() + ',' + r.dst->to_string() + ',' +
             std::to_string(r.src_port) + ',' + std::to_string(r.dst_port) + ',' + flags;
    }
    out += '\n';
  }
  return out;
}

TraceFormat guess_trace_format(const std::string& path) noexcept {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && path.substr(dot) == ".csv") return TraceFormat::csv;
  return TraceFormat::pcap;
}

std::vector<TraceFrame> parse_pcap(std::string_view data) {
  if (data.empty()) return {};
  if (data.size() < kPcapHeader) throw Error(ErrorKind::trace, "pcap: truncated file header");
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  std::uint32_t magic;
  std::memcpy(&magic, p, 4);
  bool swap = false;
  bool nano = false;
  if (magic == kPcapMagicMicro) {
  } else if (magic == kPcapMagicNano) {
    nano = true;
  } else if (magic == __builtin_bswap32(kPcapMagicMicro)) {
    swap = true;
  } else if (magic == __builtin_bswap32(kPcapMagicNano)) {
    swap = true;
    nano = true;
  } else {
    throw Error(ErrorKind::trace, "pcap: bad magic number (pcapng is not supported)");
  }
  const std::uint32_t linktype = read32(p + 20, swap) & 0x0fffffff;
  if (linktype != kLinkEthernet) {
    throw Error(ErrorKind::trace, "pcap: unsupported link type " + std::to_string(linktype));
  }

  std::vector<TraceFrame> frames;
  std::size_t off = kPcapHeader;
  while (off < data.size()) {
    if (data.size() - off < kRecordHeader) {
      throw Error(ErrorKind::trace, "pcap: truncated record header at offset " + std::to_string(off));
    }
    const std::uint32_t sec = read32(p + off, swap);
    const std::uint32_t frac = read32(p + off + 4, swap);
    const std::uint32_t caplen = read32(p + off + 8, swap);
    const std::uint32_t origlen = read32(p + off + 12, swap);
    off += kRecordHeader;
    if (caplen > data.size() - off) {
      throw Error(ErrorKind::trace, "pcap: truncated packet data at offset " + std::to_string(off));
    }
    TraceFrame f;
    f.bytes.assign(p + off, p + off + caplen);
    f.timestamp = Nanoseconds(std::int64_t(sec) * 1000000000 +
                              (nano ? std::int64_t(frac) : std::int64_t(frac) * 1000));
    f.wire_length = std::max(origlen, caplen);
    frames.push_back(std::move(f));
    off += caplen;
  }
  return frames;
}

std::string format_pcap(const std::vector<TraceFrame>& frames, bool nanosecond) {
  std::string out;
  append32(out, nanosecond ? kPcapMagicNano : kPcapMagicMicro);
  append16(out, 2);
  append16(out, 4);
  append32(out, 0);       // thiszone
  append32(out, 0);       // sigfigs
  append32(out, 262144);  // snaplen
  append32(out, kLinkEthernet);
  for (const auto& f : frames) {
    const auto ns = f.timestamp.count();
    append32(out, static_cast<std::uint32_t>(ns / 1000000000));
    const auto frac = ns % 1000000000;
    append32(out, static_cast<std::uint32_t>(nanosecond ? frac : frac / 1000));
    append32(out, static_cast<std::uint32_t>(f.bytes.size()));
    append32(out, f.length());
    out.append(reinterpret_cast<const char*>(f.bytes.data()), f.bytes.size());
  }
  return out;
}

std::vector<TraceFrame> synthesize_frames(const std::vector<TraceRecord>& records) {
  std::vector<TraceFrame> frames;
  frames.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.src || !r.dst) {
      throw Error(ErrorKind::trace, "trace record " + std::to_string(i + 1) +
                                        " has no addresses; cannot synthesize a frame");
    }
    FrameSpec spec;
    spec.src = *r.src;
    spec.dst = *r.dst;
    switch (r.protocol) {
      case TraceProtocol::tcp: spec.protocol = L4Protocol::tcp; break;
      case TraceProtocol::udp: spec.protocol = L4Protocol::udp; break;
      case TraceProtocol::icmp: spec.protocol = L4Protocol::icmp; break;
      case TraceProtocol::other: spec.protocol = L4Protocol::other; break;
    }
    spec.src_port = r.src_port;
    spec.dst_port = r.dst_port;
    spec.tcp_flags = r.tcp_flags;
    spec.length = r.length;
    TraceFrame f;
    f.bytes = build_frame(spec);
    f.timestamp = r.timestamp;
    f.wire_length = r.length;
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<TraceFrame> load_trace(const std::string& path, TraceFormat format,
                                   bool* was_sorted) {
  std::vector<TraceFrame> frames;
  if (format == TraceFormat::csv) {
    frames = synthesize_frames(load_trace_csv(path));
  } else {
    frames = parse_pcap(read_file(path));
  }
  const bool sorted = std::is_sorted(frames.begin(), frames.end(),
                                     [](const TraceFrame& a, const TraceFrame& b) {
                                       return a.timestamp < b.timestamp;
                                     });
  if (!sorted) {
    std::stable_sort(frames.begin(), frames.end(),
                     [](const TraceFrame& a, const TraceFrame& b) {
                       return a.timestamp < b.timestamp;
                     });
  }
  if (was_sorted) *was_sorted = sorted;
  return frames;
}

std::vector<TraceRecord> records_from_frames(
    const std::vector<TraceFrame>& frames,
    const std::map<IpAddress, std::string>& devices) {
  std::vector<TraceRecord> out;
  for (const auto& f : frames) {
    const auto pkt = parse_headers(f.bytes, f.timestamp, f.length());
    if (!pkt) continue;
    TraceRecord r;
    if (auto it = devices.find(pkt->src); it != devices.end()) {
      r.device_id = it->second;
      r.direction = TraceDirection::outgoing;
    } else if (auto jt = devices.find(pkt->dst); jt != devices.end()) {
      r.device_id = jt->second;
      r.direction = TraceDirection::incoming;
    } else {
      continue;
    }
    r.timestamp = pkt->timestamp;
    r.length = pkt->length;
    switch (pkt->protocol) {
      case L4Protocol::tcp: r.protocol = TraceProtocol::tcp; break;
      case L4Protocol::udp: r.protocol = TraceProtocol::udp; break;
      case L4Protocol::icmp: r.protocol = TraceProtocol::icmp; break;
      case L4Protocol::other: r.protocol = TraceProtocol::other; break;
    }
    r.src = pkt->src;
    r.dst = pkt->dst;
    r.src_port = pkt->src_port;
    r.dst_port = pkt->dst_port;
    r.tcp_flags = pkt->tcp_flags;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mudguard
