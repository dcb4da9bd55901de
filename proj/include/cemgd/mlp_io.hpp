// Copyright 2026 The CEM-GD Planner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CEMGD_MLP_IO_HPP_
#define CEMGD_MLP_IO_HPP_

// MLP weight files.
//
// Binary layout (little-endian):
//   char[8]  magic "CEMGDMLP"
//   u32      format version (1)
//   u32      activation (0 = SiLU, 1 = identity)
//   u32      state_dim, u32 action_dim
//   u32      number of hidden layers H, then H x u32 widths
//   f64[]    input_mean, input_std      (state_dim + action_dim each)
//   f64[]    output_mean, output_std    (state_dim each)
//   per layer: f64 weight (row-major, out x in), f64 bias (out)
//
// The JSON form carries the same fields under "format": "cemgd-mlp".

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cemgd/mlp.hpp"

namespace cemgd {

inline constexpr std::uint32_t kMlpFormatVersion = 1;
inline constexpr std::array<char, 8> kMlpMagic = {'C', 'E', 'M', 'G',
                                                  'D', 'M', 'L', 'P'};

static_assert(std::endian::native == std::endian::little,
              "binary MLP format assumes a little-endian host");

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void vec(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const char*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<char>& bytes) : bytes_(bytes) {}
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  Vector vec(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  void raw(void* p, std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw Error("mlp file: unexpected end of data");
    }
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
};

inline nlohmann::json vector_to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vector vector_from_json(const nlohmann::json& j, Eigen::Index n,
                               const std::string& field) {
  const auto values = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != n) {
    throw Error("mlp json: field '" + field + "' has wrong length");
  }
  return Eigen::Map<const Vector>(values.data(), n);
}

}  // namespace detail

inline std::vector<char> mlp_to_bytes(const MlpModel& model) {
  detail::ByteWriter w;
  w.raw(kMlpMagic.data(), kMlpMagic.size());
  w.u32(kMlpFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.activation()));
  w.u32(static_cast<std::uint32_t>(model.state_dim()));
  w.u32(static_cast<std::uint32_t>(model.action_dim()));
  const std::vector<int> hidden = model.hidden_sizes();
  w.u32(static_cast<std::uint32_t>(hidden.size()));
  for (int h : hidden) w.u32(static_cast<std::uint32_t>(h));
  const Normalization& norm = model.normalization();
  w.vec(norm.input_mean);
  w.vec(norm.input_std);
  w.vec(norm.output_mean);
  w.vec(norm.output_std);
  for (const DenseLayer& layer : model.layers()) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        w.f64(layer.weight(i, j));
      }
    }
    w.vec(layer.bias);
  }
  return w.bytes();
}

inline MlpModel mlp_from_bytes(const std::vector<char>& bytes) {
  detail::ByteReader r(bytes);
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMlpMagic) throw Error("mlp file: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kMlpFormatVersion) {
    throw Error("mlp file: unsupported format version " +
                std::to_string(version));
  }
  const std::uint32_t act = r.u32();
  if (act > 1) throw Error("mlp file: unknown activation");
  const int sd = static_cast<int>(r.u32());
  const int ad = static_cast<int>(r.u32());
  const std::uint32_t num_hidden = r.u32();
  if (sd < 1 || ad < 1 || num_hidden > 1024) {
    throw Error("mlp file: implausible header");
  }
  std::vector<int> hidden(num_hidden);
  for (int& h : hidden) h = static_cast<int>(r.u32());
  MlpModel model(sd, ad, hidden, static_cast<Activation>(act));
  Normalization norm;
  norm.input_mean = r.vec(sd + ad);
  norm.input_std = r.vec(sd + ad);
  norm.output_mean = r.vec(sd);
  norm.output_std = r.vec(sd);
  model.set_normalization(std::move(norm));
  for (DenseLayer& layer : model.layers()) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
        layer.weight(i, j) = r.f64();
      }
    }
    layer.bias = r.vec(layer.bias.size());
  }
  if (!r.done()) throw Error("mlp file: trailing bytes");
  return model;
}

inline nlohmann::json mlp_to_json(const MlpModel& model) {
  nlohmann::json j;
  j["format"] = "cemgd-mlp";
  j["version"] = kMlpFormatVersion;
  j["activation"] =
      model.activation() == Activation::kSilu ? "silu" : "identity";
  j["state_dim"] = model.state_dim();
  j["action_dim"] = model.action_dim();
  j["hidden"] = model.hidden_sizes();
  const Normalization& norm = model.normalization();
  j["normalization"] = {{"input_mean", detail::vector_to_json(norm.input_mean)},
                        {"input_std", detail::vector_to_json(norm.input_std)},
                        {"output_mean", detail::vector_to_json(norm.output_mean)},
                        {"output_std", detail::vector_to_json(norm.output_std)}};
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : model.layers()) {
    std::vector<double> w;
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        w.push_back(layer.weight(i, c));
      }
    }
    layers.push_back({{"rows", layer.weight.rows()},
                      {"cols", layer.weight.cols()},
                      {"weight", w},
                      {"bias", detail::vector_to_json(layer.bias)}});
  }
  j["layers"] = layers;
  return j;
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "cemgd-mlp") {
      throw Error("mlp json: unexpected format tag");
    }
    if (j.at("version").get<std::uint32_t>() != kMlpFormatVersion) {
      throw Error("mlp json: unsupported format version");
    }
    const std::string act = j.at("activation").get<std::string>();
    if (act != "silu" && act != "identity") {
      throw Error("mlp json: unknown activation '" + act + "'");
    }
    const int sd = j.at("state_dim").get<int>();
    const int ad = j.at("action_dim").get<int>();
    MlpModel model(sd, ad, j.at("hidden").get<std::vector<int>>(),
                   act == "silu" ? Activation::kSilu : Activation::kIdentity);
    const auto& nj = j.at("normalization");
    Normalization norm;
    norm.input_mean = detail::vector_from_json(nj.at("input_mean"), sd + ad, "input_mean");
    norm.input_std = detail::vector_from_json(nj.at("input_std"), sd + ad, "input_std");
    norm.output_mean = detail::vector_from_json(nj.at("output_mean"), sd, "output_mean");
    norm.output_std = detail::vector_from_json(nj.at("output_std"), sd, "output_std");
    model.set_normalization(std::move(norm));
    const auto& lj = j.at("layers");
    if (lj.size() != model.layers().size()) {
      throw Error("mlp json: layer count does not match hidden sizes");
    }
    for (std::size_t l = 0; l < lj.size(); ++l) {
      DenseLayer& layer = model.layers()[l];
      const auto w = lj[l].at("weight").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != layer.weight.size()) {
        throw Error("mlp json: weight size mismatch in layer " + std::to_string(l));
      }
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
          layer.weight(i, c) = w[i * layer.weight.cols() + c];
        }
      }
      layer.bias = detail::vector_from_json(lj[l].at("bias"), layer.bias.size(), "bias");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("mlp json: ") + e.what());
  }
}

// Writes JSON when the path ends in ".json", binary otherwise.
inline void save_mlp(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  if (path.extension() == ".json") {
    out << mlp_to_json(model).dump(1);
  } else {
    const std::vector<char> bytes = mlp_to_bytes(model);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline MlpModel load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("model file not found: '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (path.extension() == ".json") {
    try {
      return mlp_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("mlp json: " + std::string(e.what()));
    }
  }
  return mlp_from_bytes(bytes);
}

}  // namespace cemgd

#endif  // CEMGD_MLP_IO_HPP_
