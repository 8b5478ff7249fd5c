#include "polyfilter/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "polyfilter/errors.hpp"

namespace polyfilter {

using json = nlohmann::json;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::vector<std::uint8_t> to_le_bytes(std::span<const double> values) {
  std::vector<std::uint8_t> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

std::vector<double> from_le_bytes(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() % 8 != 0) throw std::invalid_argument("float64 payload length is not a multiple of 8");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(b)]) << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

json shape_json(const ShapeValues& s) {
  json j = json::object();
  if (!std::isnan(s.alpha)) j["alpha"] = s.alpha;
  if (!std::isnan(s.beta)) j["beta"] = s.beta;
  if (!std::isnan(s.c)) j["c"] = s.c;
  if (!std::isnan(s.p)) j["p"] = s.p;
  return j;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + static_cast<std::size_t>(k)];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad) throw std::invalid_argument("base64 padding in the middle of a quantum");
      v[k] = decode_char(c);
      if (v[k] < 0) throw std::invalid_argument(std::string("invalid base64 character '") + c + "'");
    }
    const std::uint32_t q = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                            (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
    out.push_back(static_cast<std::uint8_t>(q >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(q >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(q));
  }
  return out;
}

std::string checkpoint_to_json(NodeClassifier& model) {
  json j;
  j["format"] = "polyfilter-checkpoint";
  j["version"] = 1;
  j["family"] = std::string(to_string(kind_of(model.layer1.family)));
  j["num_bases"] = model.layer1.num_bases;
  j["n_features"] = model.layer1.f_in;
  j["hidden"] = model.layer1.f_out;
  j["n_classes"] = model.layer2.f_out;
  j["dropout"] = model.dropout_p;
  j["use_layernorm"] = model.layer1.use_layernorm;
  if (const auto* k = std::get_if<KrawtchoukFamily>(&model.layer1.family)) j["krawtchouk_n"] = k->n;
  json params = json::object();
  for (const ParamRef& p : model.parameters()) {
    params[p.name] = {{"shape", {p.rows, p.cols}},
                      {"dtype", "float64-le"},
                      {"data", base64_encode(to_le_bytes(p.values))}};
  }
  j["parameters"] = std::move(params);
  j["effective"] = {{"layer1", shape_json(effective_values(model.layer1.family))},
                    {"layer2", shape_json(effective_values(model.layer2.family))}};
  return j.dump(2);
}

NodeClassifier checkpoint_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (j.value("format", "") != "polyfilter-checkpoint") throw DataError("checkpoint: unrecognized format");
  try {
    ModelConfig cfg;
    cfg.family = parse_family(j.at("family").get<std::string>());
    cfg.num_bases = j.at("num_bases").get<int>();
    cfg.hidden = j.at("hidden").get<std::size_t>();
    cfg.dropout = j.at("dropout").get<double>();
    cfg.use_layernorm = j.value("use_layernorm", true);
    cfg.krawtchouk_n = j.value("krawtchouk_n", kDefaultKrawtchoukN);
    NodeClassifier m =
        NodeClassifier::create(cfg, j.at("n_features").get<std::size_t>(), j.at("n_classes").get<std::size_t>(), 0);
    const json& params = j.at("parameters");
    for (const ParamRef& p : m.parameters()) {
      if (!params.contains(p.name)) throw DataError("checkpoint: missing parameter " + p.name);
      const json& e = params[p.name];
      const auto shape = e.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2 || shape[0] != p.rows || shape[1] != p.cols) {
        throw DataError("checkpoint: shape mismatch for " + p.name);
      }
      const std::vector<double> values = from_le_bytes(base64_decode(e.at("data").get<std::string>()));
      if (values.size() != p.values.size()) throw DataError("checkpoint: length mismatch for " + p.name);
      std::copy(values.begin(), values.end(), p.values.begin());
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(NodeClassifier& model, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << checkpoint_to_json(model) << '\n';
}

NodeClassifier load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string() + ": missing or unreadable file");
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

std::string learned_params_text(const NodeClassifier& model) {
  std::ostringstream os;
  os << std::setprecision(10);
  int i = 1;
  for (const PolyConvLayer* l : {&model.layer1, &model.layer2}) {
    const ShapeValues s = effective_values(l->family);
    const std::pair<const char*, double> entries[] = {{"alpha", s.alpha}, {"beta", s.beta}, {"c", s.c}, {"p", s.p}};
    for (const auto& [name, v] : entries)
      if (!std::isnan(v)) os << "layer" << i << ' ' << name << ' ' << v << '\n';
    ++i;
  }
  return os.str();
}

}  // namespace polyfilter
