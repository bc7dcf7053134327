#pragma once

// Versioned binary checkpoint: magic, version, a JSON header describing
// hyperparameters, tensor names/shapes, optimizer step and RNG state, then
// raw float32 payloads (parameters, first moments, second moments).

#include "cl4srec/optimizer.hpp"

#include "json.hpp"

#include <filesystem>

namespace cl4srec {

struct Checkpoint {
  EncoderHyper hyper;
  EncoderParams<float> params;
  OptimizerState<float> optimizer;
  std::string rng_state;
  /// Caller-owned metadata (trainer progress, config text, ...).
  nlohmann::json meta = nlohmann::json::object();
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

/// Temp-then-rename write.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string rng_to_string(const Rng& rng);
Rng rng_from_string(const std::string& state);

nlohmann::json hyper_to_json(const EncoderHyper& h);
EncoderHyper hyper_from_json(const nlohmann::json& j);

}  // namespace cl4srec
