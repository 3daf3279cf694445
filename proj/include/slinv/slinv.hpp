#pragma once

#include "slinv/error.hpp"
#include "slinv/forward.hpp"
#include "slinv/grid.hpp"
#include "slinv/io.hpp"
#include "slinv/objective.hpp"
#include "slinv/optimizer.hpp"
#include "slinv/spectra.hpp"
#include "slinv/verification.hpp"

namespace slinv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slinv
