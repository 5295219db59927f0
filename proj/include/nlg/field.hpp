#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "nlg/error.hpp"
#include "nlg/rng.hpp"

namespace nlg {

/// Prime-field parameters. Construct through make_field(); the modulus is
/// prime and below 2^62 so products fit in unsigned __int128.
class FieldParams {
 public:
  FieldParams() = default;

  std::uint64_t modulus() const { return p_; }
  int bit_length() const { return bits_; }
  /// Bits needed to write any residue: bit length of p - 1 (at least 1).
  int element_bits() const { return elem_bits_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    const std::uint64_t s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + p_ - b; }
  std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : p_ - a; }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
    return std::uint64_t((unsigned __int128)a * b % p_);
  }
  std::uint64_t pow(std::uint64_t a, std::uint64_t e) const {
    std::uint64_t r = 1 % p_;
    a %= p_;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  /// Inverse by Fermat; throws DivisionByZero on zero.
  std::uint64_t inv(std::uint64_t a) const {
    require(a % p_ != 0, ErrorKind::DivisionByZero, "inverse of zero in F_" + std::to_string(p_));
    return pow(a, p_ - 2);
  }
  /// Reduces a signed integer into [0, p).
  std::uint64_t reduce(std::int64_t v) const {
    const std::int64_t r = v % std::int64_t(p_);
    return std::uint64_t(r < 0 ? r + std::int64_t(p_) : r);
  }

  /// Uniform residue via rejection sampling.
  std::uint64_t sample(Rng& rng) const { return rng.below(p_); }

  friend bool operator==(const FieldParams& a, const FieldParams& b) { return a.p_ == b.p_; }

 private:
  friend FieldParams make_field(std::uint64_t modulus);
  std::uint64_t p_ = 2;
  int bits_ = 2;
  int elem_bits_ = 1;
};

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(std::uint64_t n);

/// Smallest prime >= n.
std::uint64_t next_prime(std::uint64_t n);

/// Throws NotPrime unless modulus is a prime in [2, 2^62).
FieldParams make_field(std::uint64_t modulus);

/// Field element carrying its modulus; mixing fields raises FieldMismatch.
class FieldElem {
 public:
  FieldElem(const FieldParams& f, std::uint64_t residue) : f_(f), v_(residue % f.modulus()) {}

  static FieldElem from_signed(const FieldParams& f, std::int64_t v) { return FieldElem(f, f.reduce(v)); }

  std::uint64_t value() const { return v_; }
  const FieldParams& field() const { return f_; }

  friend FieldElem operator+(const FieldElem& a, const FieldElem& b) {
    check(a, b);
    return FieldElem(a.f_, a.f_.add(a.v_, b.v_));
  }
  friend FieldElem operator-(const FieldElem& a, const FieldElem& b) {
    check(a, b);
    return FieldElem(a.f_, a.f_.sub(a.v_, b.v_));
  }
  friend FieldElem operator*(const FieldElem& a, const FieldElem& b) {
    check(a, b);
    return FieldElem(a.f_, a.f_.mul(a.v_, b.v_));
  }
  friend FieldElem operator/(const FieldElem& a, const FieldElem& b) { return a * b.inv(); }
  FieldElem operator-() const { return FieldElem(f_, f_.neg(v_)); }
  FieldElem inv() const { return FieldElem(f_, f_.inv(v_)); }
  FieldElem pow(std::uint64_t e) const { return FieldElem(f_, f_.pow(v_, e)); }

  friend bool operator==(const FieldElem& a, const FieldElem& b) { return a.f_ == b.f_ && a.v_ == b.v_; }

  friend std::ostream& operator<<(std::ostream& os, const FieldElem& x) { return os << x.v_; }

 private:
  static void check(const FieldElem& a, const FieldElem& b) {
    if (!(a.f_ == b.f_))
      fail(ErrorKind::FieldMismatch, "operands from F_" + std::to_string(a.f_.modulus()) + " and F_" +
                                         std::to_string(b.f_.modulus()));
  }
  FieldParams f_;
  std::uint64_t v_;
};

inline FieldElem sample_uniform(const FieldParams& f, Rng& rng) { return FieldElem(f, f.sample(rng)); }

}  // namespace nlg
