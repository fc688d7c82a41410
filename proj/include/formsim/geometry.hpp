#ifndef FORMSIM_GEOMETRY_HPP
#define FORMSIM_GEOMETRY_HPP

#include <cmath>

namespace formsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
  friend Vec2 operator-(const Vec2& v) { return {-v.x, -v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

/// Plain 2x2 matrix [[a00, a01], [a10, a11]].
struct Mat2 {
  double a00 = 0.0, a01 = 0.0;
  double a10 = 0.0, a11 = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  double det() const { return a00 * a11 - a01 * a10; }
  Mat2 transpose() const { return {a00, a10, a01, a11}; }

  friend Vec2 operator*(const Mat2& m, const Vec2& v) {
    return {m.a00 * v.x + m.a01 * v.y, m.a10 * v.x + m.a11 * v.y};
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a00 * b.a00 + a.a01 * b.a10, a.a00 * b.a01 + a.a01 * b.a11,
            a.a10 * b.a00 + a.a11 * b.a10, a.a10 * b.a01 + a.a11 * b.a11};
  }
  friend Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.a00 - b.a00, a.a01 - b.a01, a.a10 - b.a10, a.a11 - b.a11};
  }
  friend Mat2 operator*(double s, const Mat2& m) { return {s * m.a00, s * m.a01, s * m.a10, s * m.a11}; }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Max-abs entry.
inline double max_abs(const Mat2& m) {
  return std::fmax(std::fmax(std::abs(m.a00), std::abs(m.a01)), std::fmax(std::abs(m.a10), std::abs(m.a11)));
}

/// A planar rotation; only constructible from an angle, so RᵀR = I and det R = 1
/// hold up to rounding.
class Rotation2 {
 public:
  explicit Rotation2(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    m_ = {c, -s, s, c};
  }

  const Mat2& matrix() const noexcept { return m_; }
  friend Vec2 operator*(const Rotation2& r, const Vec2& v) { return r.m_ * v; }

 private:
  Mat2 m_;
};

inline Rotation2 rotation_matrix(double theta) { return Rotation2(theta); }

/// dR/dθ = [[-sin θ, -cos θ], [cos θ, -sin θ]].
inline Mat2 rotation_derivative(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {-s, -c, c, -s};
}

}  // namespace formsim

#endif  // FORMSIM_GEOMETRY_HPP
