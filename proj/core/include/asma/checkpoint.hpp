#pragma once

#include <cstdint>
#include <string>

#include "asma/params.hpp"

namespace asma {

inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
  uint32_t version = kCheckpointVersion;
  uint64_t step = 0;
  uint64_t config_hash = 0;
  std::string rng_state;
};

// Versioned binary container, magic "ASMA", little-endian, length-prefixed
// named records: every generator/discriminator entry (parameters and SN u
// states), both optimizers' moments, the step counter, config hash and RNG
// state. save is atomic (tmp file + rename); load restores by name into an
// already-constructed model and fails on any missing or mismatched record.
template <typename T>
void save_checkpoint(const std::string& path, const CheckpointInfo& info, const ParamStore<T>& gen,
                     const ParamStore<T>& disc, const Adam<T>& opt_g, const Adam<T>& opt_d);

template <typename T>
CheckpointInfo load_checkpoint(const std::string& path, ParamStore<T>& gen, ParamStore<T>& disc, Adam<T>& opt_g,
                               Adam<T>& opt_d);

}  // namespace asma
