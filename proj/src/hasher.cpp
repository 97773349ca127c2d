#include "vlx/hasher.hpp"

#include <cmath>

#include "vlx/errors.hpp"

namespace vlx {

void ExtractorSpec::validate() const {
    if (m < 1 || n < 1) throw ConfigError("extractor needs n >= 1 and m >= 1");
    if (m > n) throw ConfigError("extractor cannot output more bits than it reads");
    if (k > static_cast<int>(n)) throw ConfigError("min-entropy claim exceeds block length");
    if (eps <= 0.0) throw ConfigError("eps must be positive");
    if (eps < 1.0 && static_cast<double>(m) > k - 2.0 * std::log2(1.0 / eps) + 1e-9)
        throw ConfigError("leftover-hash condition m <= k - 2*log2(1/eps) violated");
}

std::pair<int, double> plan_params(int m, double eps) {
    if (m < 1) throw ConfigError("m must be at least 1");
    if (eps <= 0.0) throw ConfigError("eps must be positive");
    if (eps >= 1.0) return {m, 0.0}; // any distribution is 1-close to uniform
    int k = m + 2 * static_cast<int>(std::ceil(std::log2(1.0 / eps)));
    return {k, static_cast<double>(k - m) / m};
}

BitSequence toeplitz_extract(const BitSequence& z, const BitSequence& seed, std::size_t m) {
    std::size_t n = z.size();
    if (seed.size() != n + m - 1)
        throw ConfigError("seed length " + std::to_string(seed.size()) + " != n+m-1 = " + std::to_string(n + m - 1));
    BitSequence y;
    for (std::size_t i = 0; i < m; ++i) {
        int acc = 0;
        for (std::size_t j = 0; j < n; ++j) acc ^= seed[i - j + n - 1] & z[j];
        y.push_back(acc);
    }
    return y;
}

void toeplitz_rows_u64(std::uint64_t seed_bits, std::size_t n, std::size_t m, std::uint64_t* rows) {
    for (std::size_t i = 0; i < m; ++i) {
        std::uint64_t row = 0;
        for (std::size_t j = 0; j < n; ++j)
            row |= ((seed_bits >> (i - j + n - 1)) & std::uint64_t{1}) << j;
        rows[i] = row;
    }
}

BitSequence draw_seed(const ExtractorSpec& spec, Rng& rng) {
    return rng.bits(spec.seed_length());
}

BitSequence seed_from_hex(std::string_view hex, std::size_t seed_length) {
    std::size_t want_digits = (seed_length + 3) / 4;
    if (hex.size() != want_digits)
        throw ConfigError("seed length: expected " + std::to_string(seed_length) + " bits (" +
                          std::to_string(want_digits) + " hex digits), got " + std::to_string(hex.size()) +
                          " digits");
    BitSequence bits;
    for (char c : hex) {
        int v;
        if (c >= '0' && c <= '9')
            v = c - '0';
        else if (c >= 'a' && c <= 'f')
            v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            v = c - 'A' + 10;
        else
            throw ConfigError(std::string("seed is not hexadecimal: '") + c + "'");
        for (int b = 3; b >= 0; --b) bits.push_back((v >> b) & 1);
    }
    return bits.prefix(seed_length);
}

std::string seed_to_hex(const BitSequence& seed) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    int nibble = 0, have = 0;
    for (std::size_t i = 0; i < seed.size(); ++i) {
        nibble = (nibble << 1) | seed[i];
        if (++have == 4) {
            out.push_back(digits[nibble]);
            nibble = 0;
            have = 0;
        }
    }
    if (have) out.push_back(digits[nibble << (4 - have)]);
    return out;
}

} // namespace vlx
