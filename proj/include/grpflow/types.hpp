#ifndef GRPFLOW_TYPES_HPP
#define GRPFLOW_TYPES_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace grpflow {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonPhysicalState : Error { using Error::Error; };
struct DegenerateState  : Error { using Error::Error; };
struct VacuumFormation  : Error { using Error::Error; };
struct NoConvergence    : Error { using Error::Error; };
struct OutOfFan         : Error { using Error::Error; };
struct BranchUnsupported: Error { using Error::Error; };
struct NearVacuumFan    : Error { using Error::Error; };
struct SingularSystem   : Error { using Error::Error; };
struct NewtonDivergence : Error { using Error::Error; };
struct NoRoot           : Error { using Error::Error; };
struct StiffnessFailure : Error { using Error::Error; };

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

struct Mat2 {
    double a[2][2] = {{0, 0}, {0, 0}};
    double* operator[](int i) { return a[i]; }
    const double* operator[](int i) const { return a[i]; }
};

struct Mat3 {
    double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double* operator[](int i) { return a[i]; }
    const double* operator[](int i) const { return a[i]; }

    static Mat3 identity() {
        Mat3 m;
        m[0][0] = m[1][1] = m[2][2] = 1.0;
        return m;
    }
};

inline Vec2 operator+(const Vec2& x, const Vec2& y) { return {x[0] + y[0], x[1] + y[1]}; }
inline Vec2 operator-(const Vec2& x, const Vec2& y) { return {x[0] - y[0], x[1] - y[1]}; }
inline Vec2 operator*(double s, const Vec2& x) { return {s * x[0], s * x[1]}; }

inline Vec3 operator+(const Vec3& x, const Vec3& y) { return {x[0] + y[0], x[1] + y[1], x[2] + y[2]}; }
inline Vec3 operator-(const Vec3& x, const Vec3& y) { return {x[0] - y[0], x[1] - y[1], x[2] - y[2]}; }
inline Vec3 operator*(double s, const Vec3& x) { return {s * x[0], s * x[1], s * x[2]}; }
inline Vec3 operator-(const Vec3& x) { return {-x[0], -x[1], -x[2]}; }

inline double dot(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }
inline double dot(const Vec2& x, const Vec2& y) { return x[0] * y[0] + x[1] * y[1]; }

inline double norm_inf(const Vec3& x) {
    return std::max({std::fabs(x[0]), std::fabs(x[1]), std::fabs(x[2])});
}

inline Vec3 mul(const Mat3& m, const Vec3& v) {
    Vec3 r;
    for (int i = 0; i < 3; ++i)
        r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
    return r;
}

inline Vec2 mul(const Mat2& m, const Vec2& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

inline Mat3 mul(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j] + x[i][2] * y[2][j];
    return r;
}

inline Mat2 mul(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
    return r;
}

inline Mat3 operator-(const Mat3& x, const Mat3& y) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i][j] = x[i][j] - y[i][j];
    return r;
}

inline Mat2 operator-(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r[i][j] = x[i][j] - y[i][j];
    return r;
}

inline Mat3 operator*(double s, const Mat3& m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i][j] = s * m[i][j];
    return r;
}

inline Mat2 operator*(double s, const Mat2& m) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            r[i][j] = s * m[i][j];
    return r;
}

// 2x3 block used by the invariant-field rows
struct Mat23 {
    double a[2][3] = {{0, 0, 0}, {0, 0, 0}};
    double* operator[](int i) { return a[i]; }
    const double* operator[](int i) const { return a[i]; }
};

inline Vec2 mul(const Mat23& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2]};
}

inline Mat23 mul(const Mat2& x, const Mat23& y) {
    Mat23 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
    return r;
}

} // namespace grpflow

#endif
