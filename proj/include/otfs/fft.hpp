#pragma once

#include "otfs/types.hpp"

namespace otfs::fft {

enum class Dir { forward, inverse };

/// Unitary DFT of every column (along the row index), in place.
void columns(CMat& a, Dir dir);

/// Unitary DFT of every row (along the column index), in place.
void rows(CMat& a, Dir dir);

/// Unitary DFT of a vector, in place.
void vector(CVec& v, Dir dir);

}  // namespace otfs::fft
