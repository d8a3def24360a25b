#pragma once

#include <string>

#include "asma/trainer.hpp"

namespace asma {

// Key=value text config. Keys mirror the TrainConfig / GeneratorConfig /
// DiscConfig field names exactly; '#' starts a comment. Lists are
// comma-separated, the schedule is "res:steps,res:steps".
TrainConfig parse_train_config(const std::string& text);
TrainConfig load_train_config(const std::string& path);

// Canonical serialization; the checkpoint config hash is FNV-1a over it.
std::string train_config_to_text(const TrainConfig& cfg);
uint64_t train_config_hash(const TrainConfig& cfg);

std::string asm_placement_name(AsmPlacement p);
AsmPlacement asm_placement_from_name(const std::string& s);

}  // namespace asma
