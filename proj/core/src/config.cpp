#include "soar/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "soar/error.hpp"

namespace soar {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, "key '" + key + "': " + why);
}

void check_keys(const json& j, const std::string& scope, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw Error(ErrorCode::ConfigInvalid, "unknown key '" + scope + it.key() + "'");
  }
}

Ipv4 parse_ip_or(const json& j, const std::string& key) {
  auto ip = Ipv4::parse(j.get<std::string>());
  if (!ip) bad(key, "not an IPv4 address");
  return *ip;
}

}  // namespace

ReservedIpPool EngineConfig::make_pool() const {
  ReservedIpPool pool = !pool_ips.empty()
                            ? ReservedIpPool::from_list(subnet, pool_ips)
                            : ReservedIpPool::from_ladder(
                                  subnet, pool_first.value_or(Ipv4(subnet.base.addr + 4)),
                                  pool_spacing, pool_count);
  if (dhcp_range) pool.check_dhcp_overlap(dhcp_range->first, dhcp_range->second);
  return pool;
}

EngineConfig EngineConfig::load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, "config is not valid json: " + std::string(e.what()));
  }

  EngineConfig cfg;
  check_keys(j, "", {"pool", "dhcp_range", "idle_timeout", "deploy_ahead", "engagement_gap",
                     "backend", "detectors", "catalog", "log_dir", "vault_dir", "models"});

  if (j.contains("pool")) {
    const json& p = j["pool"];
    check_keys(p, "pool.", {"subnet", "ips", "first_ip", "spacing", "count"});
    if (p.contains("subnet")) {
      auto cidr = Cidr::parse(p["subnet"].get<std::string>());
      if (!cidr) bad("pool.subnet", "not CIDR");
      cfg.subnet = *cidr;
    }
    if (p.contains("ips")) {
      cfg.pool_ips.clear();
      for (const auto& s : p["ips"]) cfg.pool_ips.push_back(parse_ip_or(s, "pool.ips"));
    }
    if (p.contains("first_ip")) cfg.pool_first = parse_ip_or(p["first_ip"], "pool.first_ip");
    if (p.contains("spacing")) cfg.pool_spacing = p["spacing"].get<int>();
    if (p.contains("count")) cfg.pool_count = p["count"].get<int>();
    if (!p.contains("ips") && (p.contains("first_ip") || p.contains("spacing") || p.contains("count")))
      cfg.pool_ips.clear();  // regular ladder requested, drop the default list
  }
  if (j.contains("dhcp_range")) {
    const json& d = j["dhcp_range"];
    check_keys(d, "dhcp_range.", {"start", "end"});
    cfg.dhcp_range = {parse_ip_or(d.at("start"), "dhcp_range.start"),
                      parse_ip_or(d.at("end"), "dhcp_range.end")};
  }
  if (j.contains("idle_timeout")) {
    cfg.idle_timeout = j["idle_timeout"].get<double>();
    if (cfg.idle_timeout <= 0) bad("idle_timeout", "must be positive");
  }
  if (j.contains("deploy_ahead")) cfg.deploy_ahead = j["deploy_ahead"].get<bool>();
  if (j.contains("engagement_gap")) {
    cfg.engagement_gap = j["engagement_gap"].get<double>();
    if (cfg.engagement_gap <= 0) bad("engagement_gap", "must be positive");
  }
  if (j.contains("backend")) {
    const json& b = j["backend"];
    check_keys(b, "backend.",
               {"kind", "latency", "runtime", "registry", "network", "readiness_timeout"});
    std::string kind = b.value("kind", "simulated");
    if (kind == "simulated") {
      cfg.backend.kind = BackendChoice::Kind::SIMULATED;
    } else if (kind == "exec") {
      cfg.backend.kind = BackendChoice::Kind::EXEC;
    } else {
      bad("backend.kind", "must be 'simulated' or 'exec'");
    }
    if (b.contains("latency")) cfg.backend.latency = b["latency"].get<double>();
    if (cfg.backend.latency < 0) bad("backend.latency", "must be >= 0");
    if (b.contains("runtime")) cfg.backend.exec.runtime = b["runtime"].get<std::string>();
    if (b.contains("registry")) cfg.backend.exec.registry = b["registry"].get<std::string>();
    if (b.contains("network")) cfg.backend.exec.network = b["network"].get<std::string>();
    if (b.contains("readiness_timeout"))
      cfg.backend.exec.readiness_timeout = b["readiness_timeout"].get<double>();
  }
  if (j.contains("detectors")) {
    const json& d = j["detectors"];
    check_keys(d, "detectors.", {"http_ids", "botnet", "ddos"});
    cfg.detectors.http_ids = d.value("http_ids", true);
    cfg.detectors.botnet = d.value("botnet", true);
    cfg.detectors.ddos = d.value("ddos", true);
  }
  if (j.contains("catalog")) {
    std::vector<HoneypotTemplate> templates;
    for (const json& t : j["catalog"]) {
      check_keys(t, "catalog[].", {"service", "port", "image", "interaction", "follow_up_of"});
      HoneypotTemplate tmpl;
      auto service = parse_service(t.at("service").get<std::string>());
      if (!service) bad("catalog[].service", t.at("service").get<std::string>());
      tmpl.service = *service;
      int port = t.at("port").get<int>();
      if (port < 1 || port > 65535) bad("catalog[].port", "must be 1..65535");
      tmpl.port = uint16_t(port);
      tmpl.image_id = t.at("image").get<std::string>();
      if (t.contains("interaction")) {
        std::string i = t["interaction"].get<std::string>();
        if (i == "HIGH") tmpl.interaction = Interaction::HIGH;
        else if (i == "MEDIUM") tmpl.interaction = Interaction::MEDIUM;
        else bad("catalog[].interaction", i);
      }
      if (t.contains("follow_up_of")) {
        auto label = parse_attack_label(t["follow_up_of"].get<std::string>());
        if (!label) bad("catalog[].follow_up_of", t["follow_up_of"].get<std::string>());
        tmpl.follow_up_of = label;
      }
      templates.push_back(std::move(tmpl));
    }
    cfg.catalog = Catalog(std::move(templates));
  }
  if (j.contains("log_dir")) cfg.log_dir = j["log_dir"].get<std::string>();
  if (j.contains("vault_dir")) cfg.vault_dir = j["vault_dir"].get<std::string>();
  if (j.contains("models")) {
    const json& m = j["models"];
    check_keys(m, "models.", {"sqli", "xss", "osc", "botnet", "ddos"});
    if (m.contains("sqli")) cfg.model_sqli = m["sqli"].get<std::string>();
    if (m.contains("xss")) cfg.model_xss = m["xss"].get<std::string>();
    if (m.contains("osc")) cfg.model_osc = m["osc"].get<std::string>();
    if (m.contains("botnet")) cfg.model_botnet = m["botnet"].get<std::string>();
    if (m.contains("ddos")) cfg.model_ddos = m["ddos"].get<std::string>();
  }

  cfg.make_pool();  // validates pool + dhcp overlap
  return cfg;
}

}  // namespace soar
