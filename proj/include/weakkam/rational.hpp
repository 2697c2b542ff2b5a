#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace weakkam {

// Exact rational scalar for the graph algorithms.  Operands in this library
// stay tiny (integer edge costs, cycle lengths <= n), so a normalized
// int64 pair is plenty; overflow throws rather than wrapping.
class rational {
public:
  rational() = default;
  rational(std::int64_t v) : num_(v), den_(1) {}
  rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::domain_error("rational: zero denominator");
    normalize();
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  friend rational operator+(const rational& a, const rational& b) {
    return rational(checked_add(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                    checked_mul(a.den_, b.den_));
  }
  friend rational operator-(const rational& a, const rational& b) {
    return rational(checked_sub(checked_mul(a.num_, b.den_), checked_mul(b.num_, a.den_)),
                    checked_mul(a.den_, b.den_));
  }
  friend rational operator*(const rational& a, const rational& b) {
    return rational(checked_mul(a.num_, b.num_), checked_mul(a.den_, b.den_));
  }
  friend rational operator/(const rational& a, const rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational: division by zero");
    return rational(checked_mul(a.num_, b.den_), checked_mul(a.den_, b.num_));
  }
  rational operator-() const {
    rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  rational& operator+=(const rational& o) { return *this = *this + o; }
  rational& operator-=(const rational& o) { return *this = *this - o; }

  friend bool operator==(const rational& a, const rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const rational& a, const rational& b) { return !(a == b); }
  friend bool operator<(const rational& a, const rational& b) {
    return checked_mul(a.num_, b.den_) < checked_mul(b.num_, a.den_);
  }
  friend bool operator>(const rational& a, const rational& b) { return b < a; }
  friend bool operator<=(const rational& a, const rational& b) { return !(b < a); }
  friend bool operator>=(const rational& a, const rational& b) { return !(a < b); }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }
  friend std::ostream& operator<<(std::ostream& os, const rational& r) { return os << r.str(); }

private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;

  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("rational: overflow");
    return r;
  }
  static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("rational: overflow");
    return r;
  }
  static std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw std::overflow_error("rational: overflow");
    return r;
  }
};

inline double to_double_value(double v) { return v; }
inline double to_double_value(const rational& r) { return r.to_double(); }

// Uniform hooks so the graph algorithms can run in floating or exact mode.
// Tolerances are ignored in exact mode: zero means zero.
template <class S>
struct scalar_ops;

template <>
struct scalar_ops<double> {
  static constexpr bool exact = false;
  static bool near_zero(double v, double tol) { return v <= tol && v >= -tol; }
  static bool nonneg(double v, double tol) { return v >= -tol; }
  static bool pos(double v, double tol) { return v > tol; }
  static double div_int(double v, int k) { return v / k; }
  static double abs(double v) { return v < 0 ? -v : v; }
};

template <>
struct scalar_ops<rational> {
  static constexpr bool exact = true;
  static bool near_zero(const rational& v, double) { return v == rational(0); }
  static bool nonneg(const rational& v, double) { return !(v < rational(0)); }
  static bool pos(const rational& v, double) { return rational(0) < v; }
  static rational div_int(const rational& v, int k) { return v / rational(k); }
  static rational abs(const rational& v) { return v < rational(0) ? -v : v; }
};

}  // namespace weakkam
