#pragma once

#include <cmath>

namespace stadia {

// North-east-down world vector, metres or metres/second by context.
struct NedVector {
    double n = 0.0;
    double e = 0.0;
    double d = 0.0;

    double norm() const { return std::sqrt(n * n + e * e + d * d); }
};

inline NedVector operator+(const NedVector& a, const NedVector& b) {
    return {a.n + b.n, a.e + b.e, a.d + b.d};
}

inline NedVector operator-(const NedVector& a, const NedVector& b) {
    return {a.n - b.n, a.e - b.e, a.d - b.d};
}

inline NedVector operator*(const NedVector& a, double s) {
    return {a.n * s, a.e * s, a.d * s};
}

inline NedVector operator*(double s, const NedVector& a) { return a * s; }

}  // namespace stadia
