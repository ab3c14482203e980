#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace soar {

enum class Service : uint8_t {
  HTTP_WEB,
  HTTP_APP,
  DB,
  SSH,
  SMTP,
  MODBUS,
  HTTP_SQLI,
  HTTP_XSS,
  HTTP_OSC,
};

enum class Interaction : uint8_t { MEDIUM, HIGH };

enum class AttackLabel : uint8_t { SQLI, XSS, OSC };

const char* service_name(Service s);
std::optional<Service> parse_service(const std::string& name);
const char* attack_label_name(AttackLabel a);
std::optional<AttackLabel> parse_attack_label(const std::string& name);
const char* interaction_name(Interaction i);

struct HoneypotTemplate {
  Service service;
  uint16_t port;
  std::string image_id;
  Interaction interaction = Interaction::HIGH;
  std::optional<AttackLabel> follow_up_of;  // SQLI/XSS/OSC variants only

  bool is_follow_up() const { return follow_up_of.has_value(); }
  bool is_http() const {
    return service == Service::HTTP_WEB || service == Service::HTTP_APP ||
           service == Service::HTTP_SQLI || service == Service::HTTP_XSS ||
           service == Service::HTTP_OSC;
  }
};

/// The honeypot image registry view: which (service, port) pairs exist.
class Catalog {
 public:
  explicit Catalog(std::vector<HoneypotTemplate> templates);

  const std::vector<HoneypotTemplate>& templates() const { return templates_; }

  /// Port-triggered deployment considers base templates only; follow-up
  /// variants deploy via IDS alerts.
  const HoneypotTemplate* match_port(uint16_t port) const;
  const HoneypotTemplate* follow_up(AttackLabel label) const;
  const HoneypotTemplate* find(Service service) const;
  std::vector<const HoneypotTemplate*> base_templates() const;

  static Catalog default_catalog();

 private:
  std::vector<HoneypotTemplate> templates_;
};

}  // namespace soar
