#pragma once

namespace clearing {

/// Selects the serial reference kernels or their OpenMP counterparts.
enum class Execution { Serial, Parallel };

}  // namespace clearing
