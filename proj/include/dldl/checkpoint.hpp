#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dldl/model.hpp"

namespace dldl {

/// Checkpoint file layout (JSON, version 1):
///
///   format       "dldl-checkpoint"
///   version      1
///   head         head kind name
///   loss         {lambda, sigma, distribution_term}
///   label_space  {l_min, l_max, step}
///   seed         initialization seed
///   dims         backbone widths, input first
///   backbone     [{rows, cols, weight: row-major, bias}] per layer
///   head_params  {rows, cols, weight: row-major, bias}
///
/// Doubles are written in shortest round-trip form, so save/load is lossless
/// and identical models give identical bytes.
struct Checkpoint {
  Model model;
  std::uint64_t seed = 0;
};

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_string(const Checkpoint &ckpt);
Checkpoint checkpoint_from_string(const std::string &text);

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace dldl
