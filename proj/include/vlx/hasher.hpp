#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "vlx/bits.hpp"
#include "vlx/models.hpp"

namespace vlx {

/// Parameters of the universal-hash back end. The hash matrix is Toeplitz,
/// so the seed must carry n + m - 1 bits.
struct ExtractorSpec {
    std::size_t n = 0; // input block length
    std::size_t m = 0; // output length
    int k = 0;         // required input min-entropy
    double eps = 1.0;  // distance guarantee

    std::size_t seed_length() const { return n + m - 1; }
    void validate() const;
};

// k = m + 2*ceil(log2(1/eps)) and alpha = (k - m)/m, the additive form the
// leftover hash lemma needs for an eps guarantee on m output bits.
// eps >= 1 is the no-extraction boundary (k = m); eps <= 0 is invalid.
std::pair<int, double> plan_params(int m, double eps);

// y_i = XOR_j seed[i - j + n - 1] * z_j over GF(2) for i in [0, m).
// Linear in z for a fixed seed. Throws on length mismatch.
BitSequence toeplitz_extract(const BitSequence& z, const BitSequence& seed, std::size_t m);

// Row masks for the word-sized fast path: rows[i] bit j equals
// seed[n - 1 + i - j]; with z packed as bit j = z_j, output bit i is
// parity(rows[i] & z). Requires n <= 64 and n + m - 1 <= 64.
void toeplitz_rows_u64(std::uint64_t seed_bits, std::size_t n, std::size_t m, std::uint64_t* rows);

BitSequence draw_seed(const ExtractorSpec& spec, Rng& rng);

// Hex seeds are MSB-first and must spell exactly ceil(len/4) digits.
BitSequence seed_from_hex(std::string_view hex, std::size_t seed_length);
std::string seed_to_hex(const BitSequence& seed);

} // namespace vlx
