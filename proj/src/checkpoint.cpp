#include "radarpose/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace radarpose {
namespace {

using json = nlohmann::ordered_json;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view b) : bytes_(b) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw std::runtime_error("checkpoint: truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t u(int width) {
    auto s = take(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

json config_json(const ModelConfig& cfg) {
  json j;
  j["variant"] = variant_name(cfg.variant);
  j["n_max"] = cfg.n_max;
  json excluded = json::array();
  for (auto jt : cfg.excluded_joints) excluded.push_back(joint_name(jt));
  j["excluded_joints"] = excluded;
  json conv = json::array();
  for (const auto& c : cfg.conv_spec) conv.push_back({c.channels, c.kernel, c.pool});
  j["conv_spec"] = conv;
  j["mlp_head_spec"] = cfg.mlp_head_spec;
  j["row_mlp_spec"] = cfg.row_mlp_spec;
  j["tnet_dim"] = cfg.tnet_dim;
  j["tnet_shared"] = cfg.tnet_shared;
  j["tnet_fc"] = cfg.tnet_fc;
  j["pointnet_shared"] = cfg.pointnet_shared;
  j["pointnet_head"] = cfg.pointnet_head;
  j["seed"] = cfg.seed;
  return j;
}

ModelConfig config_from(const json& j) {
  ModelConfig cfg;
  cfg.variant = variant_from_name(j.at("variant").get<std::string>());
  cfg.n_max = j.at("n_max").get<std::size_t>();
  cfg.excluded_joints.clear();
  for (const auto& name : j.at("excluded_joints")) {
    const auto jt = joint_from_name(name.get<std::string>());
    if (!jt) throw std::invalid_argument("unknown joint " + name.get<std::string>());
    cfg.excluded_joints.push_back(*jt);
  }
  cfg.conv_spec.clear();
  for (const auto& c : j.at("conv_spec"))
    cfg.conv_spec.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>(), c.at(2).get<std::size_t>()});
  cfg.mlp_head_spec = j.at("mlp_head_spec").get<std::vector<std::size_t>>();
  cfg.row_mlp_spec = j.at("row_mlp_spec").get<std::vector<std::size_t>>();
  cfg.tnet_dim = j.at("tnet_dim").get<std::size_t>();
  cfg.tnet_shared = j.at("tnet_shared").get<std::vector<std::size_t>>();
  cfg.tnet_fc = j.at("tnet_fc").get<std::vector<std::size_t>>();
  cfg.pointnet_shared = j.at("pointnet_shared").get<std::vector<std::size_t>>();
  cfg.pointnet_head = j.at("pointnet_head").get<std::vector<std::size_t>>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

}  // namespace

std::string model_config_to_json(const ModelConfig& cfg) { return config_json(cfg).dump(); }

ModelConfig model_config_from_json(std::string_view text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("model config: ") + e.what());
  }
}

std::string encode_checkpoint(const ModelParams& params) {
  params.norm.validate();
  json header;
  header["config"] = config_json(params.config);
  const auto& n = params.norm;
  header["norm"] = {{"gt_min", {n.gt_min.x(), n.gt_min.y(), n.gt_min.z()}},
                    {"gt_max", {n.gt_max.x(), n.gt_max.y(), n.gt_max.z()}},
                    {"snr_min", n.snr.snr_min},
                    {"snr_max", n.snr.snr_max}};
  const std::string text = header.dump();

  std::string out(kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u64(out, text.size());
  out += text;
  const auto& w = params.weights;
  put_u64(out, w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    put_u32(out, static_cast<std::uint32_t>(w.name(i).size()));
    out += w.name(i);
    put_u64(out, static_cast<std::uint64_t>(w[i].rows()));
    put_u64(out, static_cast<std::uint64_t>(w[i].cols()));
    const double* d = w[i].data();
    for (Eigen::Index k = 0; k < w[i].size(); ++k) put_u64(out, std::bit_cast<std::uint64_t>(d[k]));
  }
  return out;
}

ModelParams decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kCheckpointMagic.size()) != kCheckpointMagic) throw std::runtime_error("checkpoint: bad magic");
  if (const auto v = r.u(4); v != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(v));
  const auto header_len = r.u(8);
  ModelParams params;
  try {
    const json header = json::parse(r.take(header_len));
    params.config = config_from(header.at("config"));
    const auto& n = header.at("norm");
    for (int a = 0; a < 3; ++a) {
      params.norm.gt_min[a] = n.at("gt_min").at(static_cast<std::size_t>(a)).get<double>();
      params.norm.gt_max[a] = n.at("gt_max").at(static_cast<std::size_t>(a)).get<double>();
    }
    params.norm.snr.snr_min = n.at("snr_min").get<double>();
    params.norm.snr.snr_max = n.at("snr_max").get<double>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint header: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("checkpoint header: ") + e.what());
  }

  const auto count = r.u(8);
  for (std::uint64_t t = 0; t < count; ++t) {
    std::string name(r.take(r.u(4)));
    const auto rows = r.u(8), cols = r.u(8);
    if (rows * cols > bytes.size()) throw std::runtime_error("checkpoint: truncated");
    nn::Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    double* d = m.data();
    for (Eigen::Index k = 0; k < m.size(); ++k) d[k] = std::bit_cast<double>(r.u(8));
    params.weights.add(std::move(name), std::move(m));
  }
  if (!r.done()) throw std::runtime_error("checkpoint: trailing bytes");

  const PoseNetwork net(params.config);
  const auto& expect = net.initial_params();
  if (!params.weights.same_shapes(expect)) throw std::runtime_error("checkpoint: tensors do not match the config");
  for (std::size_t i = 0; i < expect.size(); ++i)
    if (params.weights.name(i) != expect.name(i))
      throw std::runtime_error("checkpoint: unexpected tensor " + params.weights.name(i));
  params.norm.validate();
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace radarpose
