// Copyright 2026 The chemlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "chemlab/transformer/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace chemlab::nn {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian");

template <class U>
void write_pod(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <class U>
U read_pod(std::istream& in) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(U));
  return v;
}

nlohmann::json describe(const std::vector<NamedTensor>& ts) {
  auto arr = nlohmann::json::array();
  for (const auto& t : ts) {
    arr.push_back({{"name", t.name}, {"rows", t.value.rows()}, {"cols", t.value.cols()}});
  }
  return arr;
}

std::vector<NamedTensor> allocate(const nlohmann::json& arr) {
  std::vector<NamedTensor> out;
  for (const auto& t : arr) {
    out.push_back({t.at("name").get<std::string>(),
                   Mat<float>(t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>())});
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json manifest = {{"model", ckpt.model},
                             {"step", ckpt.step},
                             {"rng_state", ckpt.rng_state},
                             {"meta", ckpt.meta},
                             {"weights", describe(ckpt.weights)},
                             {"first_moment", describe(ckpt.first_moment)},
                             {"second_moment", describe(ckpt.second_moment)}};
  const std::string text = manifest.dump();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write checkpoint " + tmp);
    }
    out.write(kMagic, sizeof kMagic);
    write_pod<std::uint32_t>(out, kCheckpointVersion);
    write_pod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto* group : {&ckpt.weights, &ckpt.first_moment, &ckpt.second_moment}) {
      for (const auto& t : *group) {
        out.write(reinterpret_cast<const char*>(t.value.data()),
                  static_cast<std::streamsize>(t.value.size() * sizeof(float)));
      }
    }
    if (!out) {
      throw std::runtime_error("short write to " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open checkpoint " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw std::runtime_error(path.string() + " is not a checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto size = read_pod<std::uint64_t>(in);
  std::string text(size, '\0');
  in.read(text.data(), static_cast<std::streamsize>(size));
  const auto manifest = nlohmann::json::parse(text);
  Checkpoint c;
  c.model = manifest.at("model").get<ModelConfig>();
  c.step = manifest.at("step").get<long>();
  c.rng_state = manifest.at("rng_state").get<std::string>();
  c.meta = manifest.at("meta");
  c.weights = allocate(manifest.at("weights"));
  c.first_moment = allocate(manifest.at("first_moment"));
  c.second_moment = allocate(manifest.at("second_moment"));
  for (auto* group : {&c.weights, &c.first_moment, &c.second_moment}) {
    for (auto& t : *group) {
      in.read(reinterpret_cast<char*>(t.value.data()),
              static_cast<std::streamsize>(t.value.size() * sizeof(float)));
    }
  }
  if (!in) {
    throw std::runtime_error("truncated checkpoint " + path.string());
  }
  return c;
}

Checkpoint snapshot(const Model<float>& model) {
  Checkpoint c;
  c.model = model.config();
  for (const auto& p : model.parameters()) {
    c.weights.push_back({p.name, p.value});
  }
  return c;
}

Model<float> restore_model(const Checkpoint& ckpt) {
  Model<float> model(ckpt.model, 0);
  auto& params = model.parameters();
  if (params.size() != ckpt.weights.size()) {
    throw std::runtime_error("checkpoint does not match model layout");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& w = ckpt.weights[i];
    if (w.name != params[i].name || w.value.rows() != params[i].value.rows() ||
        w.value.cols() != params[i].value.cols()) {
      throw std::runtime_error("checkpoint tensor " + w.name + " does not match model layout");
    }
    params[i].value = w.value;
  }
  return model;
}

}  // namespace chemlab::nn
