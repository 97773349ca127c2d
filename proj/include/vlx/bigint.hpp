#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "vlx/bits.hpp"

namespace vlx {

/// Minimal arbitrary-precision unsigned integer: just what exact binomial
/// arithmetic and fixed-width rank emission need.
class BigUint {
public:
    BigUint() = default;
    BigUint(std::uint64_t v) {
        if (v) w_.push_back(v);
    }

    bool is_zero() const { return w_.empty(); }
    std::size_t bit_length() const;
    int bit(std::size_t i) const;

    BigUint& operator+=(const BigUint& o);
    BigUint& operator-=(const BigUint& o); // requires *this >= o
    BigUint& mul_u64(std::uint64_t f);
    BigUint& div_u64(std::uint64_t d); // truncating
    BigUint& shl(std::size_t n);

    friend BigUint operator+(BigUint a, const BigUint& b) { return a += b; }
    friend BigUint operator-(BigUint a, const BigUint& b) { return a -= b; }

    std::strong_ordering operator<=>(const BigUint& o) const;
    bool operator==(const BigUint& o) const = default;

    bool fits_u64() const { return w_.size() <= 1; }
    std::uint64_t to_u64() const { return w_.empty() ? 0 : w_[0]; }

    // log2 of the value (0 maps to -inf); accurate to ~1 ulp of double.
    double log2() const;

    // MSB-first fixed-width emission; throws if the value needs more bits.
    BitSequence to_bits(std::size_t width) const;
    static BigUint from_bits(const BitSequence& bits);

    std::string to_string() const; // decimal

private:
    void trim();
    std::vector<std::uint64_t> w_; // little-endian 64-bit limbs, normalized
};

/// Exact binomial coefficient, memoized. Thread-safe.
const BigUint& binomial(std::uint32_t n, std::uint32_t k);

} // namespace vlx
