#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpp/errors.hpp"
#include "tpp/model.hpp"
#include "tpp/record.hpp"

namespace tpp {

namespace detail {

inline constexpr char kDatasetMagic[] = "TPPD1";

inline std::uint64_t to_le64(double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  return bits;
}

inline double from_le64(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  return std::bit_cast<double>(bits);
}

inline void require_keys(const nlohmann::json& j,
                         const std::vector<std::string>& keys,
                         const std::string& what) {
  for (const auto& k : keys)
    if (!j.contains(k)) throw FormatError(what + ": missing key '" + k + "'");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    bool known = false;
    for (const auto& key : keys) known = known || key == k;
    if (!known) throw FormatError(what + ": unknown key '" + k + "'");
  }
}

}  // namespace detail

// Dataset file: magic line, one-line JSON header, then raw little-endian
// float64 payload laid out class-major, shot-major, observable-major,
// time-minor.
inline void write_dataset(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  nlohmann::ordered_json header;
  header["n_obs"] = ds.n_obs();
  header["n_time"] = ds.n_time();
  header["dt"] = ds.dt;
  header["classes"] = ds.classes;
  std::vector<int> counts;
  for (const auto& cls : ds.shots) counts.push_back(static_cast<int>(cls.size()));
  header["shots_per_class"] = counts;
  out << detail::kDatasetMagic << "\n" << header.dump() << "\n";
  for (const auto& cls : ds.shots)
    for (const auto& rec : cls)
      for (int m = 0; m < rec.n_obs(); ++m)
        for (int i = 0; i < rec.n_time(); ++i) {
          const std::uint64_t bits = detail::to_le64(rec.values(m, i));
          out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
        }
  if (!out) throw FormatError("write to '" + path + "' failed");
}

inline LabeledDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::string magic;
  if (!std::getline(in, magic) || magic != detail::kDatasetMagic)
    throw FormatError("'" + path + "': bad magic");
  std::string header_line;
  if (!std::getline(in, header_line))
    throw FormatError("'" + path + "': missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': header parse error: " + e.what());
  }
  detail::require_keys(header, {"n_obs", "n_time", "dt", "classes", "shots_per_class"},
                       "dataset header");

  LabeledDataset ds;
  int n_obs = 0, n_time = 0;
  std::vector<int> counts;
  try {
    n_obs = header.at("n_obs").get<int>();
    n_time = header.at("n_time").get<int>();
    ds.dt = header.at("dt").get<double>();
    ds.classes = header.at("classes").get<std::vector<std::string>>();
    counts = header.at("shots_per_class").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': header field error: " + e.what());
  }
  if (n_obs < 1 || n_time < 1 || !(ds.dt > 0.0))
    throw FormatError("'" + path + "': invalid dimensions in header");
  if (counts.size() != ds.classes.size())
    throw FormatError("'" + path + "': shots_per_class/classes length mismatch");
  for (int n : counts)
    if (n < 0) throw FormatError("'" + path + "': negative shot count");

  ds.shots.resize(ds.classes.size());
  std::vector<char> buf(static_cast<std::size_t>(n_obs) * n_time * sizeof(double));
  for (std::size_t c = 0; c < counts.size(); ++c) {
    ds.shots[c].reserve(counts[c]);
    for (int s = 0; s < counts[c]; ++s) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      if (in.gcount() != static_cast<std::streamsize>(buf.size()))
        throw FormatError("'" + path + "': truncated payload");
      HeterodyneRecord rec;
      rec.dt = ds.dt;
      rec.values.resize(n_obs, n_time);
      std::size_t off = 0;
      for (int m = 0; m < n_obs; ++m)
        for (int i = 0; i < n_time; ++i) {
          std::uint64_t bits;
          std::memcpy(&bits, buf.data() + off, sizeof(bits));
          off += sizeof(bits);
          rec.values(m, i) = detail::from_le64(bits);
        }
      ds.shots[c].push_back(std::move(rec));
    }
  }
  if (in.peek() != std::ifstream::traits_type::eof())
    throw FormatError("'" + path + "': trailing bytes after payload");
  return ds;
}

inline void write_model(const TrainedTpp& model, const std::string& path) {
  model.validate();
  nlohmann::ordered_json j;
  j["classes"] = model.classes;
  j["lambda"] = model.lambda;
  j["method"] = method_name(model.method);
  std::vector<std::vector<double>> w(model.W.rows());
  for (Eigen::Index r = 0; r < model.W.rows(); ++r)
    w[r].assign(model.W.row(r).begin(), model.W.row(r).end());
  j["W"] = w;
  j["b"] = std::vector<double>(model.b.begin(), model.b.end());
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("write to '" + path + "' failed");
}

inline TrainedTpp read_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': parse error: " + e.what());
  }
  detail::require_keys(j, {"classes", "lambda", "method", "W", "b"}, "model file");
  TrainedTpp model;
  try {
    model.classes = j.at("classes").get<std::vector<std::string>>();
    model.lambda = j.at("lambda").get<double>();
    model.method = method_from_name(j.at("method").get<std::string>());
    const auto w = j.at("W").get<std::vector<std::vector<double>>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (w.empty() || w.size() != model.classes.size() || b.size() != w.size())
      throw FormatError("'" + path + "': W/b/classes sizes disagree");
    model.W.resize(w.size(), w[0].size());
    for (std::size_t r = 0; r < w.size(); ++r) {
      if (w[r].size() != w[0].size())
        throw FormatError("'" + path + "': ragged weight rows");
      for (std::size_t ccol = 0; ccol < w[r].size(); ++ccol)
        model.W(r, ccol) = w[r][ccol];
    }
    model.b = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': field error: " + e.what());
  }
  return model;
}

}  // namespace tpp
