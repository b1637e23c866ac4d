#include "locfair/nn/bundle.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>
#include <zlib.h>

#include "locfair/error.hpp"

namespace locfair::nn {

namespace {

constexpr std::string_view kMagic = "LCFR";
constexpr std::string_view kProbeName = "probe";

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) {
      throw FormatError(fmt::format("checkpoint: truncated at byte {} (need {} more of {})", pos_,
                                    n, in_.size()));
    }
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
              static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

void write_net(Writer& w, std::string_view name, const TrainableNet& tn) {
  w.str(name);
  const MlpSpec& s = tn.net.spec();
  w.u32(static_cast<std::uint32_t>(s.input_dim));
  w.u32(static_cast<std::uint32_t>(s.hidden_dims.size()));
  for (std::size_t h : s.hidden_dims) w.u32(static_cast<std::uint32_t>(h));
  w.u32(static_cast<std::uint32_t>(s.output_dim));
  w.f64(s.leaky_slope);
  w.f64(s.dropout_p);
  w.u8(s.final_sigmoid ? 1 : 0);
  const auto params = tn.net.params();
  const auto& states = tn.opt.states();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.u32(static_cast<std::uint32_t>(params[i].rows()));
    w.u32(static_cast<std::uint32_t>(params[i].cols()));
    for (double v : params[i].values()) w.f64(v);
    for (double v : states[i].m) w.f64(v);
    for (double v : states[i].v) w.f64(v);
    w.u64(states[i].t);
  }
}

std::pair<std::string, TrainableNet> read_net(Reader& r) {
  std::string name = r.str();
  MlpSpec s;
  s.input_dim = r.u32();
  const std::uint32_t hidden = r.u32();
  if (hidden > 64) throw FormatError(fmt::format("checkpoint: implausible layer count {}", hidden));
  for (std::uint32_t i = 0; i < hidden; ++i) s.hidden_dims.push_back(r.u32());
  s.output_dim = r.u32();
  s.leaky_slope = r.f64();
  s.dropout_p = r.f64();
  s.final_sigmoid = r.u8() != 0;
  const std::uint32_t count = r.u32();
  if (count != 2 * (hidden + 1)) {
    throw FormatError(fmt::format("checkpoint: network {} has {} tensors", name, count));
  }
  std::vector<ad::Tensor> params;
  std::vector<ad::AdamState> states;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    if (rows * cols > (1u << 26)) throw FormatError("checkpoint: implausible tensor size");
    std::vector<double> values(rows * cols);
    ad::AdamState st;
    st.m.resize(rows * cols);
    st.v.resize(rows * cols);
    for (double& v : values) v = r.f64();
    for (double& v : st.m) v = r.f64();
    for (double& v : st.v) v = r.f64();
    st.t = r.u64();
    params.push_back(ad::Tensor::from(rows, cols, std::move(values), true));
    states.push_back(std::move(st));
  }
  TrainableNet tn(Mlp::from_params(std::move(s), std::move(params)));
  tn.opt.states() = std::move(states);
  return {std::move(name), std::move(tn)};
}

}  // namespace

TrainableNet& ModelBundle::by_name(std::string_view name) {
  return const_cast<TrainableNet&>(std::as_const(*this).by_name(name));
}

const TrainableNet& ModelBundle::by_name(std::string_view name) const {
  if (name == "F_a") return attr_encoder;
  if (name == "M_a") return attr_head;
  if (name == "F_z") return fair_encoder;
  if (name == "G") return decoder;
  if (name == "d") return discriminator;
  if (name == "M_y") return label_head;
  throw Error(fmt::format("bundle: unknown network '{}'", name));
}

ModelBundle init_bundle(std::size_t input_dim, Rng& rng) {
  if (input_dim == 0) throw ConfigError("init_bundle: input_dim must be >= 1");
  ModelBundle b;
  b.input_dim = input_dim;
  b.attr_encoder = TrainableNet(Mlp(encoder_spec(input_dim), rng));
  b.attr_head = TrainableNet(Mlp(head_spec(), rng));
  b.fair_encoder = TrainableNet(Mlp(encoder_spec(input_dim), rng));
  b.decoder = TrainableNet(Mlp(decoder_spec(input_dim), rng));
  b.discriminator = TrainableNet(Mlp(head_spec(), rng));
  b.label_head = TrainableNet(Mlp(head_spec(), rng));
  return b;
}

std::string encode_bundle(const ModelBundle& bundle) {
  Writer w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(bundle.input_dim));
  w.str(bundle.config_json);
  w.u32(bundle.probe ? 7 : 6);
  for (auto name : ModelBundle::kNetNames) write_net(w, name, bundle.by_name(name));
  if (bundle.probe) write_net(w, kProbeName, *bundle.probe);
  const std::uint32_t crc = crc_of(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

ModelBundle decode_bundle(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 4 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("checkpoint: bad magic (not a locfair checkpoint)");
  }
  Reader r(bytes.substr(kMagic.size()));
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError(fmt::format("checkpoint: version {} not supported (expected {})", version,
                                  kCheckpointVersion));
  }
  if (bytes.size() < kMagic.size() + 12) throw FormatError("checkpoint: truncated header");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  Reader tail(bytes.substr(bytes.size() - 4));
  const std::uint32_t stored = tail.u32();
  const std::uint32_t actual = crc_of(body);
  if (actual != stored) {
    throw FormatError(fmt::format("checkpoint: checksum mismatch (stored {:08x}, computed {:08x})",
                                  stored, actual));
  }

  ModelBundle b;
  b.input_dim = r.u32();
  b.config_json = r.str();
  const std::uint32_t nets = r.u32();
  if (nets != 6 && nets != 7) throw FormatError(fmt::format("checkpoint: {} networks", nets));
  for (std::uint32_t i = 0; i < nets; ++i) {
    auto [name, tn] = read_net(r);
    if (name == kProbeName) {
      b.probe = std::move(tn);
    } else {
      b.by_name(name) = std::move(tn);
    }
  }
  if (kMagic.size() + r.pos() != body.size()) {
    throw FormatError(fmt::format("checkpoint: {} trailing bytes",
                                  static_cast<long>(body.size()) -
                                      static_cast<long>(kMagic.size() + r.pos())));
  }
  if (b.fair_encoder.net.spec().input_dim != b.input_dim) {
    throw FormatError("checkpoint: F_z input width disagrees with header input_dim");
  }
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  const std::string bytes = encode_bundle(bundle);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_bundle(bytes);
}

std::uint64_t param_hash(const Mlp& net) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : net.params()) {
    for (double v : p.values()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  }
  return h;
}

}  // namespace locfair::nn
