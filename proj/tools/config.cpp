#include "config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace udepth::cli {
namespace {

std::string scalar_text(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw std::invalid_argument("config key '" + key + "': unsupported value type");
}

}  // namespace

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config " + path.string() + ": expected a JSON object");
  return j;
}

void apply_config(CLI::App& command, const nlohmann::json& config) {
  for (const auto& [key, value] : config.items()) {
    if (key == "config") throw std::invalid_argument("config files cannot nest 'config'");
    CLI::Option* opt = command.get_option_no_throw("--" + key);
    if (!opt) throw std::invalid_argument("unknown config key '" + key + "' for " + command.get_name());
    if (opt->count() > 0) continue;
    std::vector<std::string> values;
    if (value.is_array()) {
      for (const auto& v : value) values.push_back(scalar_text(v, key));
    } else if (opt->get_type_size() == 0) {
      if (!value.is_boolean()) throw std::invalid_argument("config key '" + key + "' must be true or false");
      if (!value.get<bool>()) continue;
      values.push_back("true");
    } else {
      values.push_back(scalar_text(value, key));
    }
    for (const auto& v : values) opt->add_result(v);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
}

}  // namespace udepth::cli
