// SPDX-License-Identifier: Apache-2.0
#include "swaplab/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "swaplab/error.hpp"

namespace swaplab {

namespace {

constexpr char kMagic[8] = {'S', 'W', 'P', 'L', 'A', 'B', '0', '1'};

using json = nlohmann::json;

json spec_to_json(const ModelSpec& spec) {
  json j;
  j["layer_sizes"] = spec.layer_sizes;
  j["use_batchnorm"] = std::vector<int>(spec.use_batchnorm.begin(), spec.use_batchnorm.end());
  j["activation"] = to_string(spec.activation);
  return j;
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  spec.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  auto bn = j.at("use_batchnorm").get<std::vector<int>>();
  spec.use_batchnorm.assign(bn.begin(), bn.end());
  spec.activation = activation_from_string(j.at("activation").get<std::string>());
  spec.validate();
  return spec;
}

void append_payload(std::vector<double>& payload, const std::vector<double>& v) {
  payload.insert(payload.end(), v.begin(), v.end());
}

ParamKind kind_from_string(const std::string& s) {
  if (s == "weight") return ParamKind::kWeight;
  if (s == "bias") return ParamKind::kBias;
  if (s == "bn_scale") return ParamKind::kBnScale;
  if (s == "bn_shift") return ParamKind::kBnShift;
  throw ParseError("checkpoint: unknown tensor kind " + s);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json header;
  header["format"] = 1;
  header["model"] = spec_to_json(ckpt.spec);

  std::vector<double> payload;
  json tensors = json::array();
  for (const auto& t : ckpt.weights.params) {
    json jt;
    jt["name"] = t.name;
    jt["kind"] = to_string(t.kind);
    jt["rows"] = t.rows;
    jt["cols"] = t.cols;
    jt["offset"] = payload.size();
    tensors.push_back(std::move(jt));
    append_payload(payload, t.data);
  }
  header["tensors"] = std::move(tensors);

  json bn = json::array();
  for (size_t l = 0; l < ckpt.weights.bn.size(); ++l) {
    const auto& s = ckpt.weights.bn[l];
    if (s.empty()) continue;
    json js;
    js["layer"] = l;
    js["size"] = s.mean.size();
    js["mean_offset"] = payload.size();
    append_payload(payload, s.mean);
    js["var_offset"] = payload.size();
    append_payload(payload, s.var);
    bn.push_back(std::move(js));
  }
  header["bn_stats"] = std::move(bn);

  if (ckpt.velocity) {
    json vel = json::array();
    for (const auto& t : ckpt.velocity->params) {
      json jt;
      jt["name"] = t.name;
      jt["rows"] = t.rows;
      jt["cols"] = t.cols;
      jt["offset"] = payload.size();
      vel.push_back(std::move(jt));
      append_payload(payload, t.data);
    }
    header["velocity"] = std::move(vel);
  }

  if (!ckpt.rng_streams.empty()) {
    json rng = json::array();
    for (const auto& r : ckpt.rng_streams) {
      json jr;
      jr["label"] = r.label;
      jr["seed"] = r.seed;
      jr["state"] = r.state.state;
      jr["inc"] = r.state.inc;
      jr["draws"] = r.state.draws;
      rng.push_back(std::move(jr));
    }
    header["rng"] = std::move(rng);
  }
  if (!ckpt.meta.empty()) header["meta"] = ckpt.meta;
  header["payload_doubles"] = payload.size();

  std::string htext = header.dump();
  uint64_t hlen = htext.size();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out) throw ParseError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError(path + ": not a swaplab checkpoint (bad magic)");
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  if (!in) throw ParseError(path + ": truncated checkpoint header length");
  std::string htext(hlen, '\0');
  in.read(htext.data(), static_cast<std::streamsize>(hlen));
  if (!in) throw ParseError(path + ": truncated checkpoint header");
  json header = json::parse(htext, nullptr, false);
  if (header.is_discarded()) throw ParseError(path + ": malformed checkpoint header json");

  size_t payload_count = header.at("payload_doubles").get<size_t>();
  std::vector<double> payload(payload_count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload_count * sizeof(double)));
  if (!in) throw ParseError(path + ": truncated checkpoint payload");

  auto slice = [&](size_t offset, size_t count) {
    check(offset + count <= payload.size(), "checkpoint: payload slice out of range");
    return std::vector<double>(payload.begin() + static_cast<std::ptrdiff_t>(offset),
                               payload.begin() + static_cast<std::ptrdiff_t>(offset + count));
  };

  Checkpoint ckpt;
  ckpt.spec = spec_from_json(header.at("model"));
  for (const auto& jt : header.at("tensors")) {
    Tensor t;
    t.name = jt.at("name").get<std::string>();
    t.kind = kind_from_string(jt.at("kind").get<std::string>());
    t.rows = jt.at("rows").get<size_t>();
    t.cols = jt.at("cols").get<size_t>();
    t.data = slice(jt.at("offset").get<size_t>(), t.rows * t.cols);
    ckpt.weights.params.push_back(std::move(t));
  }
  ckpt.weights.bn.resize(static_cast<size_t>(ckpt.spec.hidden_count()));
  for (const auto& js : header.at("bn_stats")) {
    size_t layer = js.at("layer").get<size_t>();
    size_t size = js.at("size").get<size_t>();
    check(layer < ckpt.weights.bn.size(), "checkpoint: bn layer out of range");
    ckpt.weights.bn[layer].mean = slice(js.at("mean_offset").get<size_t>(), size);
    ckpt.weights.bn[layer].var = slice(js.at("var_offset").get<size_t>(), size);
  }
  if (header.contains("velocity")) {
    Gradient vel;
    size_t i = 0;
    for (const auto& jt : header.at("velocity")) {
      Tensor t;
      t.name = jt.at("name").get<std::string>();
      t.kind = i < ckpt.weights.params.size() ? ckpt.weights.params[i].kind : ParamKind::kWeight;
      t.rows = jt.at("rows").get<size_t>();
      t.cols = jt.at("cols").get<size_t>();
      t.data = slice(jt.at("offset").get<size_t>(), t.rows * t.cols);
      vel.params.push_back(std::move(t));
      ++i;
    }
    ckpt.velocity = std::move(vel);
  }
  if (header.contains("rng")) {
    for (const auto& jr : header.at("rng")) {
      RngCheckpoint r;
      r.label = jr.at("label").get<std::string>();
      r.seed = jr.at("seed").get<uint64_t>();
      r.state.state = jr.at("state").get<uint64_t>();
      r.state.inc = jr.at("inc").get<uint64_t>();
      r.state.draws = jr.at("draws").get<uint64_t>();
      ckpt.rng_streams.push_back(std::move(r));
    }
  }
  if (header.contains("meta"))
    ckpt.meta = header.at("meta").get<std::map<std::string, std::string>>();
  return ckpt;
}

}  // namespace swaplab
