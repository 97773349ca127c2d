#include "vlx/codec.hpp"

#include "vlx/errors.hpp"

namespace vlx {

BigUint rank(const BitSequence& x) {
    // Walking left to right: placing a 1 at position i skips every sequence
    // that has a 0 there instead, i.e. C(remaining positions, remaining ones).
    BigUint r(0);
    std::size_t ones = x.count_ones();
    std::size_t n = x.size();
    for (std::size_t i = 0; i < n && ones > 0; ++i) {
        std::size_t left = n - i - 1;
        if (x[i] == 1) {
            r += binomial(static_cast<std::uint32_t>(left), static_cast<std::uint32_t>(ones));
            --ones;
        }
    }
    return r;
}

BitSequence unrank(std::size_t length, std::size_t ones, const BigUint& r) {
    if (ones > length) throw DomainError("unrank: more ones than positions");
    if (r >= binomial(static_cast<std::uint32_t>(length), static_cast<std::uint32_t>(ones)))
        throw DomainError("unrank: rank out of range");
    BigUint rest = r;
    BitSequence out;
    for (std::size_t i = 0; i < length; ++i) {
        std::size_t left = length - i - 1;
        const BigUint& with_zero = binomial(static_cast<std::uint32_t>(left), static_cast<std::uint32_t>(ones));
        if (rest < with_zero) {
            out.push_back(0);
        } else {
            rest -= with_zero;
            out.push_back(1);
            --ones;
        }
    }
    return out;
}

PhraseTable::PhraseTable() {
    nodes_.emplace_back(); // root = empty phrase, index 0
    by_index_.push_back(0);
}

std::optional<PhraseTable::Code> PhraseTable::step(Walk& walk, int bit) {
    std::int64_t next = nodes_[walk.node].child[bit];
    if (next >= 0) {
        walk.node = static_cast<std::size_t>(next);
        return std::nullopt;
    }
    Node node;
    node.parent = static_cast<std::int64_t>(walk.node);
    node.bit = bit;
    node.phrase_index = ++count_;
    nodes_[walk.node].child[bit] = static_cast<std::int64_t>(nodes_.size());
    Code code{nodes_[walk.node].phrase_index, bit};
    nodes_.push_back(node);
    by_index_.push_back(nodes_.size() - 1);
    walk.node = 0;
    return code;
}

PhraseTable::Code PhraseTable::consume_phrase(BitReader& in) {
    Walk walk;
    while (true) {
        auto b = in.read();
        if (!b) throw StreamExhausted("input ended inside an LZ phrase");
        if (auto code = step(walk, *b)) return *code;
    }
}

BitSequence PhraseTable::phrase(std::size_t index) const {
    if (index >= by_index_.size()) throw DomainError("phrase index out of range");
    std::vector<int> bits;
    std::int64_t node = static_cast<std::int64_t>(by_index_[index]);
    while (node > 0) {
        bits.push_back(nodes_[static_cast<std::size_t>(node)].bit);
        node = nodes_[static_cast<std::size_t>(node)].parent;
    }
    BitSequence out;
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) out.push_back(*it);
    return out;
}

std::vector<PhraseTable::Code> lz_parse(BitReader& in, std::size_t phrases) {
    PhraseTable table;
    std::vector<PhraseTable::Code> codes;
    codes.reserve(phrases);
    for (std::size_t i = 0; i < phrases; ++i) codes.push_back(table.consume_phrase(in));
    return codes;
}

BitSequence lz_decode(const std::vector<PhraseTable::Code>& codes) {
    PhraseTable table;
    BitSequence out;
    for (const auto& code : codes) {
        BitSequence phrase = table.phrase(code.prefix_index);
        phrase.push_back(code.last_bit);
        out.append(phrase);
        // re-register through a replay reader to keep the table in sync
        SequenceBitReader replay(phrase);
        table.consume_phrase(replay);
    }
    return out;
}

} // namespace vlx
