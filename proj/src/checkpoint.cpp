#include "cl4srec/checkpoint.hpp"

#include "cl4srec/dataset_io.hpp"

#include <cstring>
#include <sstream>

namespace cl4srec {

namespace {

constexpr char kMagic[8] = {'C', 'L', '4', 'S', 'C', 'K', 'P', 'T'};

template <class Int>
void put(std::string& out, Int x) {
  char buf[sizeof(Int)];
  std::memcpy(buf, &x, sizeof(Int));
  out.append(buf, sizeof(Int));
}

template <class Int>
Int take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(Int) > in.size()) throw Error("checkpoint truncated");
  Int x;
  std::memcpy(&x, in.data() + pos, sizeof(Int));
  pos += sizeof(Int);
  return x;
}

}  // namespace

std::string rng_to_string(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng rng_from_string(const std::string& state) {
  Rng rng;
  std::istringstream is(state);
  is >> rng;
  if (!is) throw Error("malformed RNG state");
  return rng;
}

nlohmann::json hyper_to_json(const EncoderHyper& h) {
  return {{"d", h.d},       {"heads", h.heads},     {"layers", h.layers},   {"max_len", h.max_len},
          {"d_ff", h.d_ff}, {"dropout", h.dropout}, {"ln_eps", h.ln_eps}, {"num_items", h.num_items}};
}

EncoderHyper hyper_from_json(const nlohmann::json& j) {
  EncoderHyper h;
  h.d = j.at("d");
  h.heads = j.at("heads");
  h.layers = j.at("layers");
  h.max_len = j.at("max_len");
  h.d_ff = j.at("d_ff");
  h.dropout = j.at("dropout");
  h.ln_eps = j.at("ln_eps");
  h.num_items = j.at("num_items");
  return h;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  nlohmann::json header;
  header["hyper"] = hyper_to_json(ckpt.hyper);
  auto& tensors = header["tensors"] = nlohmann::json::array();
  ckpt.params.for_each([&](const std::string& name, const Mat<float>& m) {
    tensors.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  header["optimizer_step"] = ckpt.optimizer.step;
  header["rng_state"] = ckpt.rng_state;
  header["meta"] = ckpt.meta;
  const auto text = header.dump();

  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out += text;
  auto dump = [&](const EncoderParams<float>& p) {
    p.for_each([&](const std::string&, const Mat<float>& m) {
      out.append(reinterpret_cast<const char*>(m.data()), sizeof(float) * static_cast<std::size_t>(m.size()));
    });
  };
  dump(ckpt.params);
  dump(ckpt.optimizer.m);
  dump(ckpt.optimizer.v);
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error("not a checkpoint file");
  }
  std::size_t pos = sizeof kMagic;
  const auto version = take<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) throw Error("unsupported checkpoint version " + std::to_string(version));
  const auto len = take<std::uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw Error("checkpoint truncated");
  const auto header = nlohmann::json::parse(bytes.substr(pos, len));
  pos += len;

  Checkpoint ck;
  ck.hyper = hyper_from_json(header.at("hyper"));
  ck.params = EncoderParams<float>::zeros(ck.hyper);
  ck.optimizer = OptimizerState<float>::zeros(ck.hyper);
  ck.optimizer.step = header.at("optimizer_step");
  ck.rng_state = header.at("rng_state");
  ck.meta = header.at("meta");

  const auto& tensors = header.at("tensors");
  std::size_t idx = 0;
  ck.params.for_each([&](const std::string& name, const Mat<float>& m) {
    const auto& t = tensors.at(idx++);
    if (t.at("name") != name || t.at("rows") != m.rows() || t.at("cols") != m.cols()) {
      throw Error("checkpoint tensor layout mismatch at " + name);
    }
  });
  if (idx != tensors.size()) throw Error("checkpoint tensor count mismatch");
  auto load = [&](EncoderParams<float>& p) {
    p.for_each([&](const std::string&, Mat<float>& m) {
      const auto n = sizeof(float) * static_cast<std::size_t>(m.size());
      if (pos + n > bytes.size()) throw Error("checkpoint truncated");
      std::memcpy(m.data(), bytes.data() + pos, n);
      pos += n;
    });
  };
  load(ck.params);
  load(ck.optimizer.m);
  load(ck.optimizer.v);
  if (pos != bytes.size()) throw Error("trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

}  // namespace cl4srec
