#include "scenematch/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace scenematch {

using nlohmann::json;

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

json tensor_map_json(const ParamMap& m) {
  json j = json::object();
  for (const auto& [name, t] : m) j[name] = matrix_json(t);
  return j;
}

ParamMap tensor_map_unjson(const json& j, const std::string& what) {
  ParamMap m;
  for (const auto& [name, t] : j.items()) m.emplace(name, matrix_unjson(t, what + "." + name));
  return m;
}

constexpr const char* kChecksumPrefix = "checksum fnv1a64 ";

}  // namespace

std::string serialize_checkpoint(const Checkpoint& cp) {
  json j;
  j["version"] = cp.version;
  j["config"] = config_json(cp.config);
  j["epoch"] = cp.epoch;
  j["lr"] = cp.lr;
  j["tensors"] = tensor_map_json(cp.tensors);
  j["adam_m"] = tensor_map_json(cp.adam_m);
  j["adam_v"] = tensor_map_json(cp.adam_v);
  j["adam_t"] = cp.adam_t;
  j["rng_state"] = cp.rng_state;
  std::string body = j.dump(1);
  std::ostringstream os;
  os << body << "\n" << kChecksumPrefix << std::hex << fnv1a64(body) << "\n";
  return os.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  const size_t mark = text.rfind(kChecksumPrefix);
  if (mark == std::string::npos || mark == 0)
    throw FormatError("checkpoint: missing checksum line");
  const std::string body = text.substr(0, mark - 1);  // strip the separating \n
  std::string hex = text.substr(mark + std::string(kChecksumPrefix).size());
  while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r')) hex.pop_back();
  uint64_t want = 0;
  std::istringstream is(hex);
  is >> std::hex >> want;
  if (is.fail() || !is.eof()) throw FormatError("checkpoint: malformed checksum line");
  if (fnv1a64(body) != want)
    throw FormatError("checkpoint: checksum mismatch (file truncated or corrupted)");

  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  Checkpoint cp;
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw FormatError("checkpoint: missing version");
  cp.version = j["version"].get<int>();
  if (cp.version != Checkpoint::kVersion) {
    throw FormatError("checkpoint: version " + std::to_string(cp.version) +
                      " is not supported (expected " +
                      std::to_string(Checkpoint::kVersion) + ")");
  }
  cp.config = config_unjson(j.at("config"));
  cp.epoch = j.at("epoch").get<int>();
  cp.lr = j.at("lr").get<double>();
  cp.tensors = tensor_map_unjson(j.at("tensors"), "tensors");
  cp.adam_m = tensor_map_unjson(j.at("adam_m"), "adam_m");
  cp.adam_v = tensor_map_unjson(j.at("adam_v"), "adam_v");
  cp.adam_t = j.at("adam_t").get<long long>();
  cp.rng_state = j.at("rng_state").get<std::string>();
  return cp;
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("checkpoint: cannot write " + path);
  out << serialize_checkpoint(cp);
  if (!out) throw FormatError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("checkpoint: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace scenematch
