#pragma once

#include "hpfc/errors.hpp"

namespace hpfc {

// Control mode: -1 tracks piston position, +1 tracks load force.
enum class Mode : int { position = -1, force = +1 };

inline int mode_sign(Mode h) { return static_cast<int>(h); }

inline Mode mode_from_sign(int s) {
    if (s == -1) return Mode::position;
    if (s == +1) return Mode::force;
    throw ValidationError("mode must be -1 or +1");
}

inline const char* mode_name(Mode h) {
    return h == Mode::position ? "position" : "force";
}

}  // namespace hpfc
