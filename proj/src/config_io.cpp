#include "solarsched/config_io.hpp"

#include <charconv>
#include <fstream>

#include "kv_file.hpp"

namespace solarsched {

namespace {

std::string fmt_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

SystemConfig load_system_config(const std::string& path) {
  SystemConfig cfg;
  cfg.gateways.clear();
  for (const auto& e : detail::parse_kv_file(path)) {
    if (e.key == "bandwidth_hz") {
      cfg.bandwidth_hz = detail::kv_to_double(e);
    } else if (e.key == "noise_density") {
      cfg.noise_density_w_per_hz = detail::kv_to_double(e);
    } else if (e.key == "slot_length_s") {
      cfg.slot_length_s = detail::kv_to_double(e);
    } else if (e.key == "slots_per_frame") {
      cfg.slots_per_frame = static_cast<int>(detail::kv_to_long(e));
    } else if (e.key == "epsilon_time_s") {
      cfg.epsilon_time_s = detail::kv_to_double(e);
    } else if (e.key == "gateway_path_loss_db") {
      int id = 0;
      for (const auto& item : detail::split_csv_list(e.value)) {
        detail::KvEntry fake{e.key, item, e.line};
        cfg.gateways.push_back(
            GatewayChannel::from_path_loss(id++, detail::kv_to_double(fake)));
      }
    } else {
      throw ParseError("unknown config key '" + e.key + "'", e.line);
    }
  }
  cfg.validate();
  return cfg;
}

void save_system_config(const SystemConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write config file: " + path);
  out << "bandwidth_hz=" << fmt_double(cfg.bandwidth_hz) << "\n";
  out << "noise_density=" << fmt_double(cfg.noise_density_w_per_hz) << "\n";
  out << "slot_length_s=" << fmt_double(cfg.slot_length_s) << "\n";
  out << "slots_per_frame=" << cfg.slots_per_frame << "\n";
  out << "epsilon_time_s=" << fmt_double(cfg.epsilon_time_s) << "\n";
  out << "gateway_path_loss_db=";
  for (std::size_t i = 0; i < cfg.gateways.size(); ++i) {
    if (i) out << ",";
    out << fmt_double(cfg.gateways[i].path_loss_db);
  }
  out << "\n";
}

}  // namespace solarsched
