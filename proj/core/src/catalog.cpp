#include "soar/catalog.hpp"

#include <set>

#include "soar/error.hpp"

namespace soar {

const char* service_name(Service s) {
  switch (s) {
    case Service::HTTP_WEB: return "HTTP_WEB";
    case Service::HTTP_APP: return "HTTP_APP";
    case Service::DB: return "DB";
    case Service::SSH: return "SSH";
    case Service::SMTP: return "SMTP";
    case Service::MODBUS: return "MODBUS";
    case Service::HTTP_SQLI: return "HTTP_SQLI";
    case Service::HTTP_XSS: return "HTTP_XSS";
    case Service::HTTP_OSC: return "HTTP_OSC";
  }
  return "?";
}

std::optional<Service> parse_service(const std::string& name) {
  for (auto s : {Service::HTTP_WEB, Service::HTTP_APP, Service::DB, Service::SSH, Service::SMTP,
                 Service::MODBUS, Service::HTTP_SQLI, Service::HTTP_XSS, Service::HTTP_OSC}) {
    if (name == service_name(s)) return s;
  }
  return std::nullopt;
}

const char* attack_label_name(AttackLabel a) {
  switch (a) {
    case AttackLabel::SQLI: return "SQLI";
    case AttackLabel::XSS: return "XSS";
    case AttackLabel::OSC: return "OSC";
  }
  return "?";
}

std::optional<AttackLabel> parse_attack_label(const std::string& name) {
  for (auto a : {AttackLabel::SQLI, AttackLabel::XSS, AttackLabel::OSC}) {
    if (name == attack_label_name(a)) return a;
  }
  return std::nullopt;
}

const char* interaction_name(Interaction i) {
  return i == Interaction::HIGH ? "HIGH" : "MEDIUM";
}

Catalog::Catalog(std::vector<HoneypotTemplate> templates) : templates_(std::move(templates)) {
  std::set<std::pair<Service, uint16_t>> seen;
  for (const auto& t : templates_) {
    if (t.port == 0) throw Error(ErrorCode::ConfigInvalid, "template port must be 1..65535");
    if (!seen.insert({t.service, t.port}).second)
      throw Error(ErrorCode::ConfigInvalid,
                  std::string("duplicate (service, port): ") + service_name(t.service));
  }
}

const HoneypotTemplate* Catalog::match_port(uint16_t port) const {
  for (const auto& t : templates_) {
    if (!t.is_follow_up() && t.port == port) return &t;
  }
  return nullptr;
}

const HoneypotTemplate* Catalog::follow_up(AttackLabel label) const {
  for (const auto& t : templates_) {
    if (t.follow_up_of == label) return &t;
  }
  return nullptr;
}

const HoneypotTemplate* Catalog::find(Service service) const {
  for (const auto& t : templates_) {
    if (t.service == service) return &t;
  }
  return nullptr;
}

std::vector<const HoneypotTemplate*> Catalog::base_templates() const {
  std::vector<const HoneypotTemplate*> out;
  for (const auto& t : templates_) {
    if (!t.is_follow_up()) out.push_back(&t);
  }
  return out;
}

Catalog Catalog::default_catalog() {
  return Catalog({
      {Service::HTTP_WEB, 80, "apache-httpd", Interaction::HIGH, std::nullopt},
      {Service::HTTP_APP, 8080, "tomcat", Interaction::HIGH, std::nullopt},
      {Service::DB, 3306, "mysql-5.7", Interaction::HIGH, std::nullopt},
      {Service::SSH, 22, "cowrie", Interaction::MEDIUM, std::nullopt},
      {Service::SMTP, 25, "mailoney", Interaction::MEDIUM, std::nullopt},
      {Service::MODBUS, 502, "modbus-server", Interaction::HIGH, std::nullopt},
      {Service::HTTP_SQLI, 80, "web-sqli", Interaction::HIGH, AttackLabel::SQLI},
      {Service::HTTP_XSS, 8080, "web-xss", Interaction::HIGH, AttackLabel::XSS},
      {Service::HTTP_OSC, 8080, "web-osc", Interaction::HIGH, AttackLabel::OSC},
  });
}

}  // namespace soar
