#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedunlearn {

// Flat model parameter vector. Layout is fixed per model kind (see model.hpp)
// so that curvature diagonals line up across modules.
using ParamVector = std::vector<double>;

// One training example: fixed-dimension features plus a label. For
// classifiers the label is an integral class index stored as a double; for
// regression it is a real target.
struct Example {
    std::vector<double> x;
    double y = 0.0;
};

using Dataset = std::vector<Example>;
using LocalDataset = std::vector<Example>;

enum class Role { Learned, Unlearned };

inline const char* role_name(Role r) { return r == Role::Unlearned ? "unlearned" : "learned"; }

} // namespace fedunlearn
