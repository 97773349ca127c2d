#include "vlx/bigint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "vlx/errors.hpp"

namespace vlx {

void BigUint::trim() {
    while (!w_.empty() && w_.back() == 0) w_.pop_back();
}

std::size_t BigUint::bit_length() const {
    if (w_.empty()) return 0;
    std::uint64_t top = w_.back();
    std::size_t bits = 0;
    while (top) {
        ++bits;
        top >>= 1;
    }
    return (w_.size() - 1) * 64 + bits;
}

int BigUint::bit(std::size_t i) const {
    std::size_t word = i / 64;
    if (word >= w_.size()) return 0;
    return static_cast<int>((w_[word] >> (i % 64)) & 1u);
}

BigUint& BigUint::operator+=(const BigUint& o) {
    if (o.w_.size() > w_.size()) w_.resize(o.w_.size(), 0);
    unsigned __int128 carry = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        unsigned __int128 s = carry + w_[i] + (i < o.w_.size() ? o.w_[i] : 0);
        w_[i] = static_cast<std::uint64_t>(s);
        carry = s >> 64;
    }
    if (carry) w_.push_back(static_cast<std::uint64_t>(carry));
    return *this;
}

BigUint& BigUint::operator-=(const BigUint& o) {
    if (*this < o) throw DomainError("BigUint subtraction would underflow");
    unsigned __int128 borrow = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        unsigned __int128 sub = borrow + (i < o.w_.size() ? o.w_[i] : 0);
        if (static_cast<unsigned __int128>(w_[i]) >= sub) {
            w_[i] = static_cast<std::uint64_t>(w_[i] - sub);
            borrow = 0;
        } else {
            w_[i] = static_cast<std::uint64_t>((static_cast<unsigned __int128>(1) << 64) + w_[i] - sub);
            borrow = 1;
        }
    }
    trim();
    return *this;
}

BigUint& BigUint::mul_u64(std::uint64_t f) {
    if (f == 0 || w_.empty()) {
        w_.clear();
        return *this;
    }
    unsigned __int128 carry = 0;
    for (auto& limb : w_) {
        unsigned __int128 p = static_cast<unsigned __int128>(limb) * f + carry;
        limb = static_cast<std::uint64_t>(p);
        carry = p >> 64;
    }
    if (carry) w_.push_back(static_cast<std::uint64_t>(carry));
    return *this;
}

BigUint& BigUint::div_u64(std::uint64_t d) {
    if (d == 0) throw DomainError("BigUint division by zero");
    unsigned __int128 rem = 0;
    for (std::size_t i = w_.size(); i-- > 0;) {
        unsigned __int128 cur = (rem << 64) | w_[i];
        w_[i] = static_cast<std::uint64_t>(cur / d);
        rem = cur % d;
    }
    trim();
    return *this;
}

BigUint& BigUint::shl(std::size_t n) {
    if (w_.empty() || n == 0) return *this;
    std::size_t words = n / 64, bits = n % 64;
    w_.insert(w_.begin(), words, 0);
    if (bits) {
        std::uint64_t carry = 0;
        for (std::size_t i = words; i < w_.size(); ++i) {
            std::uint64_t next = w_[i] >> (64 - bits);
            w_[i] = (w_[i] << bits) | carry;
            carry = next;
        }
        if (carry) w_.push_back(carry);
    }
    return *this;
}

std::strong_ordering BigUint::operator<=>(const BigUint& o) const {
    if (w_.size() != o.w_.size()) return w_.size() <=> o.w_.size();
    for (std::size_t i = w_.size(); i-- > 0;)
        if (w_[i] != o.w_[i]) return w_[i] <=> o.w_[i];
    return std::strong_ordering::equal;
}

double BigUint::log2() const {
    if (w_.empty()) return -std::numeric_limits<double>::infinity();
    std::size_t bl = bit_length();
    // top (up to) 64 bits as a mantissa
    std::uint64_t top;
    int shift;
    if (bl <= 64) {
        top = w_[0];
        shift = 0;
    } else {
        std::size_t drop = bl - 64;
        std::size_t word = drop / 64, off = drop % 64;
        top = w_[word] >> off;
        if (off && word + 1 < w_.size()) top |= w_[word + 1] << (64 - off);
        shift = static_cast<int>(drop);
    }
    return std::log2(static_cast<double>(top)) + shift;
}

BitSequence BigUint::to_bits(std::size_t width) const {
    if (bit_length() > width)
        throw DomainError("value needs " + std::to_string(bit_length()) + " bits, field has " + std::to_string(width));
    BitSequence out;
    for (std::size_t i = width; i-- > 0;) out.push_back(bit(i));
    return out;
}

BigUint BigUint::from_bits(const BitSequence& bits) {
    BigUint v;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        v.shl(1);
        if (bits[i]) v += BigUint(1);
    }
    return v;
}

std::string BigUint::to_string() const {
    if (w_.empty()) return "0";
    BigUint tmp = *this;
    std::string digits;
    while (!tmp.is_zero()) {
        unsigned __int128 rem = 0;
        for (std::size_t i = tmp.w_.size(); i-- > 0;) {
            unsigned __int128 cur = (rem << 64) | tmp.w_[i];
            tmp.w_[i] = static_cast<std::uint64_t>(cur / 10);
            rem = cur % 10;
        }
        tmp.trim();
        digits.push_back(static_cast<char>('0' + static_cast<int>(rem)));
    }
    std::reverse(digits.begin(), digits.end());
    return digits;
}

const BigUint& binomial(std::uint32_t n, std::uint32_t k) {
    static std::map<std::pair<std::uint32_t, std::uint32_t>, BigUint> cache;
    static std::mutex mtx;
    static const BigUint zero(0);

    if (k > n) return zero;
    if (k > n - k) k = n - k;

    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({n, k});
    if (it != cache.end()) return it->second;

    // C(n, i) = C(n, i-1) * (n - i + 1) / i, exact at every step
    BigUint c(1);
    for (std::uint32_t i = 1; i <= k; ++i) {
        c.mul_u64(n - i + 1);
        c.div_u64(i);
    }
    return cache.emplace(std::make_pair(n, k), std::move(c)).first->second;
}

} // namespace vlx
