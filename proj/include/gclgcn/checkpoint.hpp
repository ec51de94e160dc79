// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gclgcn/autodiff.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace gclgcn {

// Layout: "GCLC", u16 version, then until end of file per tensor: u16 name length,
// name bytes, u8 rank, u32 dims, little-endian f64 values (row-major).
inline constexpr std::uint16_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, std::span<const ad::Parameter* const> tensors);
void write_checkpoint(const std::filesystem::path& path, std::span<const ad::Parameter* const> tensors);

std::vector<ad::Parameter> read_checkpoint(std::istream& in);
std::vector<ad::Parameter> read_checkpoint(const std::filesystem::path& path);

/// Copies values into `targets` by name. Throws MismatchError on missing
/// names or shape differences.
void restore(std::span<ad::Parameter* const> targets, const std::vector<ad::Parameter>& saved);

}  // namespace gclgcn
