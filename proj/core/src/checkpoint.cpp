#include "dlinoss/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "dlinoss/errors.hpp"
#include "dlinoss/train.hpp"
#include "json_util.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace dlinoss {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'I', 'N', 'O', 'S', 'S', 'W'};
constexpr std::uint32_t kVersion = 1;

struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  const std::vector<double>* data;
};

std::vector<TensorRef> tensor_table(const ModelConfig& config, const Weights& w) {
  std::vector<TensorRef> refs;
  refs.push_back({"enc.w", {w.enc_w.rows, w.enc_w.cols}, &w.enc_w.a});
  refs.push_back({"enc.b", {w.enc_b.size()}, &w.enc_b});
  for (std::size_t b = 0; b < w.blocks.size(); ++b) {
    const auto& blk = w.blocks[b];
    const std::string p = "block." + std::to_string(b) + ".";
    refs.push_back({p + "dt_bar", {blk.dt_bar.size()}, &blk.dt_bar});
    refs.push_back({p + "a_bar", {blk.a_bar.size()}, &blk.a_bar});
    if (config.variant == Variant::DLinossImex)
      refs.push_back({p + "g_bar", {blk.g_bar.size()}, &blk.g_bar});
    refs.push_back({p + "b_in", {blk.b_in.rows, blk.b_in.cols}, &blk.b_in.a});
    refs.push_back({p + "c_out", {blk.c_out.rows, blk.c_out.cols}, &blk.c_out.a});
    refs.push_back({p + "d_feed", {blk.d_feed.size()}, &blk.d_feed});
    refs.push_back({p + "w_out", {blk.w_out.rows, blk.w_out.cols}, &blk.w_out.a});
    refs.push_back({p + "w_gate", {blk.w_gate.rows, blk.w_gate.cols}, &blk.w_gate.a});
    refs.push_back({p + "b_out", {blk.b_out.size()}, &blk.b_out});
    refs.push_back({p + "b_gate", {blk.b_gate.size()}, &blk.b_gate});
  }
  refs.push_back({"dec.w", {w.dec_w.rows, w.dec_w.cols}, &w.dec_w.a});
  refs.push_back({"dec.b", {w.dec_b.size()}, &w.dec_b});
  return refs;
}

detail::json full_config_json(const ModelConfig& config) {
  detail::json j = detail::model_config_to_json(config);
  j["input_dim"] = config.input_dim;
  j["output_dim"] = config.output_dim;
  j["mixing"] = config.mixing == Mixing::Glu ? "glu" : "identity";
  return j;
}

ModelConfig full_config_from_json(const detail::json& j) {
  detail::json base = j;
  base.erase("input_dim");
  base.erase("output_dim");
  base.erase("mixing");
  ModelConfig config = detail::model_config_from_json(base);
  config.input_dim = j.at("input_dim").get<std::size_t>();
  config.output_dim = j.at("output_dim").get<std::size_t>();
  const std::string mixing = j.at("mixing").get<std::string>();
  config.mixing = mixing == "glu" ? Mixing::Glu : Mixing::Identity;
  return config;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelConfig& config, const Weights& w) {
  const auto refs = tensor_table(config, w);
  detail::json header;
  header["config"] = full_config_json(config);
  auto& tensors = header["tensors"] = detail::json::array();
  std::size_t offset = 0;
  for (const auto& ref : refs) {
    tensors.push_back({{"name", ref.name},
                       {"shape", ref.shape},
                       {"offset", offset},
                       {"count", ref.data->size()}});
    offset += ref.data->size();
  }
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const std::uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& ref : refs)
    out.write(reinterpret_cast<const char*>(ref.data->data()),
              static_cast<std::streamsize>(ref.data->size() * sizeof(double)));
  if (!out) throw IoError("short write while saving checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("'" + path + "' is not a weight checkpoint");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kVersion) throw IoError("unsupported checkpoint version");
  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw IoError("truncated checkpoint header in '" + path + "'");

  detail::json header;
  try {
    header = detail::json::parse(header_text);
  } catch (const detail::json::exception&) {
    throw IoError("corrupt checkpoint header in '" + path + "'");
  }

  Checkpoint ckpt;
  ckpt.config = full_config_from_json(header.at("config"));
  ckpt.weights = zeros_like(ckpt.config);

  // payload tensors arrive in table order; shapes must match the config
  auto refs = tensor_table(ckpt.config, ckpt.weights);
  const auto& tensors = header.at("tensors");
  if (tensors.size() != refs.size())
    throw IoError("checkpoint tensor table does not match its config");
  for (std::size_t t = 0; t < refs.size(); ++t) {
    const auto& meta = tensors.at(t);
    if (meta.at("name").get<std::string>() != refs[t].name ||
        meta.at("count").get<std::size_t>() != refs[t].data->size())
      throw IoError("checkpoint tensor '" + refs[t].name + "' has unexpected shape");
    auto* dst = const_cast<std::vector<double>*>(refs[t].data);
    in.read(reinterpret_cast<char*>(dst->data()),
            static_cast<std::streamsize>(dst->size() * sizeof(double)));
  }
  if (!in) throw IoError("truncated checkpoint payload in '" + path + "'");
  return ckpt;
}

}  // namespace dlinoss
