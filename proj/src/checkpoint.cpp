// SPDX-License-Identifier: Apache-2.0
#include "hazediff/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "hazediff/errors.hpp"

namespace hazediff {

namespace {

constexpr char kMagic[8] = {'H', 'Z', 'D', 'F', 'C', 'K', 'P', '1'};

void write_u64(std::ofstream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

} // namespace

void save_checkpoint(ToyEpsNet& model, const ExperimentConfig& cfg, int img_channels,
                     const std::string& path) {
  std::vector<float> params;
  model.for_each_param([&](std::vector<float>& w, std::vector<float>&) {
    params.insert(params.end(), w.begin(), w.end());
  });

  nlohmann::json header = config_to_json(cfg);
  header["img_channels"] = img_channels;
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot write " + path);
  out.write(kMagic, 8);
  write_u64(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  write_u64(out, params.size());
  for (float p : params) {
    uint32_t u;
    std::memcpy(&u, &p, 4);
    unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                          static_cast<unsigned char>((u >> 8) & 0xff),
                          static_cast<unsigned char>((u >> 16) & 0xff),
                          static_cast<unsigned char>((u >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  if (!out) throw DataError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("checkpoint: bad magic in " + path);

  const uint64_t header_len = read_u64(in);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("checkpoint: truncated header in " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint: corrupt header in " + path);
  }

  Checkpoint ck;
  if (header.contains("img_channels")) {
    ck.img_channels = header.at("img_channels").get<int>();
    header.erase("img_channels");
  }
  ck.config = parse_config(header);

  SeededRng init(ck.config.train.seed);
  ck.model = ToyEpsNet(ck.config.net_config(ck.img_channels), init);

  const uint64_t count = read_u64(in);
  std::vector<float> params(count);
  for (uint64_t i = 0; i < count; ++i) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    uint32_t u = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<uint32_t>(b[3]) << 24);
    std::memcpy(&params[i], &u, 4);
  }
  if (!in) throw DataError("checkpoint: truncated parameters in " + path);

  size_t cursor = 0;
  ck.model.for_each_param([&](std::vector<float>& w, std::vector<float>&) {
    if (cursor + w.size() > params.size())
      throw DataError("checkpoint: parameter count mismatch in " + path);
    std::copy(params.begin() + cursor, params.begin() + cursor + w.size(), w.begin());
    cursor += w.size();
  });
  if (cursor != params.size())
    throw DataError("checkpoint: parameter count mismatch in " + path);
  return ck;
}

bool same_experiment_modulo_fcb(const Checkpoint& a, const Checkpoint& b) {
  nlohmann::json ja = config_to_json(a.config);
  nlohmann::json jb = config_to_json(b.config);
  ja["fcb"].erase("use_fcb");
  jb["fcb"].erase("use_fcb");
  ja["train"].erase("use_fcb");
  jb["train"].erase("use_fcb");
  return ja == jb && a.img_channels == b.img_channels;
}

} // namespace hazediff
