#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vlx/bigint.hpp"
#include "vlx/bits.hpp"

namespace vlx {

struct RankValue {
    BigUint value;
    std::size_t width = 0; // bit count for fixed-width emission
};

// Lexicographic rank (0 < 1) of x among all sequences with the same length
// and the same number of ones, via the combinatorial number system. Exact.
BigUint rank(const BitSequence& x);

// Inverse of rank over the (length, ones) class; throws on r out of range.
BitSequence unrank(std::size_t length, std::size_t ones, const BigUint& r);

/// Incremental LZ78 phrase dictionary. Index 0 is reserved for the empty
/// phrase; inserted phrases are numbered from 1 in insertion order. Every
/// phrase's longest proper prefix is either empty or an earlier phrase.
class PhraseTable {
public:
    struct Code {
        std::uint64_t prefix_index = 0;
        int last_bit = 0;
        bool operator==(const Code&) const = default;
    };

    PhraseTable();

    std::size_t phrase_count() const { return count_; }

    // Consumes the shortest phrase not yet in the table, registers it and
    // returns (index of its longest proper prefix, final bit).
    // Throws StreamExhausted if the source ends mid-phrase.
    Code consume_phrase(BitReader& in);

    /// Bit-at-a-time walk through the dictionary.
    struct Walk {
        std::size_t node = 0;
    };

    // Advances the walk by one bit. When the extended phrase is novel it is
    // registered, the walk resets to the root, and its code is returned.
    std::optional<Code> step(Walk& walk, int bit);

    // Phrase by index (1-based; index 0 yields the empty sequence).
    BitSequence phrase(std::size_t index) const;

private:
    struct Node {
        std::int64_t child[2] = {-1, -1};
        std::int64_t parent = -1;
        int bit = 0;
        std::uint64_t phrase_index = 0; // 0 = not a complete phrase (root)
    };
    std::vector<Node> nodes_;           // nodes_[0] is the root/empty phrase
    std::vector<std::size_t> by_index_; // phrase index -> node
    std::size_t count_ = 0;
};

// Parses exactly `phrases` phrases from the stream.
std::vector<PhraseTable::Code> lz_parse(BitReader& in, std::size_t phrases);

// Replays a code sequence back into the bit stream it was parsed from.
BitSequence lz_decode(const std::vector<PhraseTable::Code>& codes);

} // namespace vlx
