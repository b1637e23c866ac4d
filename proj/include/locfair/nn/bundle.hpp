#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "locfair/autodiff/adam.hpp"
#include "locfair/nn/mlp.hpp"
#include "locfair/rng.hpp"

namespace locfair::nn {

/// A network together with the optimizer that trains it.
struct TrainableNet {
  Mlp net;
  ad::Adam opt;

  TrainableNet() = default;
  explicit TrainableNet(Mlp m) : net(std::move(m)), opt(net.params()) {}
};

/// The six networks of the method plus the optional leakage probe.
struct ModelBundle {
  std::size_t input_dim = 0;
  TrainableNet attr_encoder;   // F_a
  TrainableNet attr_head;      // M_a
  TrainableNet fair_encoder;   // F_z
  TrainableNet decoder;        // G
  TrainableNet discriminator;  // d
  TrainableNet label_head;     // M_y
  std::optional<TrainableNet> probe;
  /// Free-form effective configuration (JSON text) stored with checkpoints.
  std::string config_json;

  static constexpr std::array<std::string_view, 6> kNetNames = {"F_a", "M_a", "F_z",
                                                                "G",   "d",   "M_y"};
  TrainableNet& by_name(std::string_view name);
  const TrainableNet& by_name(std::string_view name) const;
};

/// Deterministic given the generator state.
ModelBundle init_bundle(std::size_t input_dim, Rng& rng);

/// Binary checkpoint: magic "LCFR", u32 version, u32 input_dim, config text,
/// then one section per network (name, spec, parameters with Adam moments and
/// step counters), closed by a CRC-32 over every preceding byte. All numbers
/// are little-endian; reals are IEEE-754 binary64.
void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_bundle(const std::filesystem::path& path);

std::string encode_bundle(const ModelBundle& bundle);
ModelBundle decode_bundle(std::string_view bytes);

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// FNV-1a over parameter bytes; used to assert freeze contracts.
std::uint64_t param_hash(const Mlp& net);

}  // namespace locfair::nn
