#pragma once

#include "otfs/types.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace otfs {

enum class Modulation { qpsk, qam16, qam64 };

int bits_per_symbol(Modulation mod);
std::string to_string(Modulation mod);
Modulation modulation_from_string(const std::string& name);

/// Gray-coded square constellation with unit average energy, indexed by the
/// integer whose bits (MSB first) are the symbol label.
const std::vector<cplx>& constellation(Modulation mod);

std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, Modulation mod);
/// Nearest-point decisions.
std::vector<std::uint8_t> demap_hard(std::span<const cplx> symbols, Modulation mod);
cplx slice(cplx z, Modulation mod);

}  // namespace otfs
