#include "soar/http.hpp"

#include <array>
#include <cstring>

namespace soar {
namespace {

constexpr std::array<const char*, 9> kMethods = {
    "GET ", "POST ", "PUT ", "DELETE ", "HEAD ", "OPTIONS ", "PATCH ", "TRACE ", "CONNECT "};

bool starts_with_method(const std::string& buf, size_t pos) {
  for (const char* m : kMethods) {
    size_t len = std::strlen(m);
    if (buf.compare(pos, len, m) == 0) return true;
  }
  return false;
}

// Boundary = offset where a request line starts (position 0 or right after a
// newline).
std::vector<size_t> request_boundaries(const std::string& buf) {
  std::vector<size_t> bounds;
  if (starts_with_method(buf, 0)) bounds.push_back(0);
  for (size_t i = 0; i + 1 < buf.size(); ++i) {
    if (buf[i] == '\n' && starts_with_method(buf, i + 1)) bounds.push_back(i + 1);
  }
  return bounds;
}

bool segment_complete(const std::string& seg) {
  return seg.find("\r\n\r\n") != std::string::npos || (!seg.empty() && seg.back() == '\n');
}

}  // namespace

HttpRequest parse_http_request(std::string raw, double ts, Ipv4 src_ip) {
  HttpRequest req;
  req.ts = ts;
  req.src_ip = src_ip;
  req.raw = std::move(raw);
  req.method = "-";
  req.path = "-";

  if (!starts_with_method(req.raw, 0)) return req;  // degenerate, raw preserved

  size_t line_end = req.raw.find('\n');
  std::string line = req.raw.substr(0, line_end == std::string::npos ? req.raw.size() : line_end);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  size_t sp1 = line.find(' ');
  size_t sp2 = line.find(' ', sp1 + 1);
  req.method = line.substr(0, sp1);
  std::string target = sp2 == std::string::npos ? line.substr(sp1 + 1)
                                                : line.substr(sp1 + 1, sp2 - sp1 - 1);
  size_t qmark = target.find('?');
  if (qmark == std::string::npos) {
    req.path = target.empty() ? "-" : target;
  } else {
    req.path = qmark == 0 ? "-" : target.substr(0, qmark);
    req.query = target.substr(qmark + 1);
  }

  size_t hdr_end = req.raw.find("\r\n\r\n");
  if (hdr_end != std::string::npos) req.body = req.raw.substr(hdr_end + 4);
  return req;
}

std::vector<HttpRequest> reassemble_http(std::span<const Packet> packets) {
  HttpAssembler asmbl;
  std::vector<HttpRequest> out;
  for (const Packet& p : packets) {
    auto got = asmbl.feed(p);
    out.insert(out.end(), got.begin(), got.end());
  }
  auto rest = asmbl.flush();
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::vector<HttpRequest> HttpAssembler::feed(const Packet& p) {
  std::vector<HttpRequest> out;
  if (p.payload.empty()) return out;

  auto key = std::make_tuple(p.ip_src.addr, p.ip_dst.addr, p.src_port, p.dst_port);
  Stream& st = streams_[key];
  if (st.buf.empty()) {
    st.first_ts = p.ts;
    st.src = p.ip_src;
  }
  st.buf.append(reinterpret_cast<const char*>(p.payload.data()), p.payload.size());

  auto bounds = request_boundaries(st.buf);
  if (bounds.empty() || bounds[0] != 0) {
    // no request line at the head: garbage stays buffered until flush
    return out;
  }
  bounds.push_back(st.buf.size());
  size_t consumed = 0;
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    std::string seg = st.buf.substr(bounds[i], bounds[i + 1] - bounds[i]);
    bool last = i + 2 == bounds.size();
    if (last && !segment_complete(seg)) break;  // wait for the rest
    out.push_back(parse_http_request(std::move(seg), st.first_ts, st.src));
    consumed = bounds[i + 1];
  }
  if (consumed > 0) {
    st.buf.erase(0, consumed);
    st.first_ts = p.ts;
  }
  return out;
}

std::vector<HttpRequest> HttpAssembler::flush() {
  std::vector<HttpRequest> out;
  for (auto& [key, st] : streams_) {
    if (!st.buf.empty())
      out.push_back(parse_http_request(std::move(st.buf), st.first_ts, st.src));
  }
  streams_.clear();
  return out;
}

}  // namespace soar
