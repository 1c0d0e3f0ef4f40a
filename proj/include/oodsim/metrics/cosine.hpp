#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

namespace oodsim {

struct CosineResult {
    double value = 0.0;
    bool degenerate = false; // one of the inputs had zero norm
};

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. A zero-norm input gives 0 and
/// sets the degenerate flag.
inline CosineResult cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw std::invalid_argument("cosine: vectors differ in length");
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) return {0.0, true};
    return {std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0), false};
}

} // namespace oodsim
