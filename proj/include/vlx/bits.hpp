#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vlx/errors.hpp"

namespace vlx {

/// An ordered, finite sequence of bits with explicit length. Immutable in
/// spirit: cheap value type, safe to copy and share.
class BitSequence {
public:
    BitSequence() = default;

    static BitSequence from_string(std::string_view s);
    static BitSequence zeros(std::size_t n) { return BitSequence(std::vector<std::uint8_t>(n, 0)); }

    // MSB-first integer view: bit 0 of the sequence is the most significant
    // of the n used bits. Requires n <= 64.
    static BitSequence from_u64(std::uint64_t v, std::size_t n);
    std::uint64_t to_u64() const;

    void push_back(int bit);
    void pop_back() { bits_.pop_back(); }
    void append(const BitSequence& other);

    int operator[](std::size_t i) const { return bits_[i]; }
    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }

    BitSequence prefix(std::size_t n) const;
    std::string to_string() const;

    std::size_t count_ones() const;
    std::size_t count_zeros() const { return size() - count_ones(); }

    bool operator==(const BitSequence&) const = default;
    // Ordering fit for map keys; coincides with lexicographic order on
    // equal-length sequences and puts proper prefixes first.
    bool operator<(const BitSequence& other) const { return bits_ < other.bits_; }

    bool is_prefix_of(const BitSequence& other) const;

private:
    explicit BitSequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
    std::vector<std::uint8_t> bits_; // one byte per bit, values 0/1
};

struct PackedBits {
    std::vector<std::uint8_t> bytes;
    std::size_t bit_count = 0;
};

// MSB-first packing; a partial final byte is zero-padded on the right.
PackedBits pack(const BitSequence& bits);
BitSequence unpack(const std::vector<std::uint8_t>& bytes, std::size_t bit_count);

/// Stateful bit cursor over some bit source, MSB-first within each byte for
/// byte-backed sources. Single-threaded use only.
class BitReader {
public:
    virtual ~BitReader() = default;

    // Next bit, or nullopt at end of stream.
    std::optional<int> read() {
        auto b = next_bit();
        if (b) ++consumed_;
        return b;
    }

    // Reads exactly n bits; throws StreamExhausted if the source ends first.
    BitSequence read_bits(std::size_t n);

    std::uint64_t consumed() const { return consumed_; }

protected:
    virtual std::optional<int> next_bit() = 0;

private:
    std::uint64_t consumed_ = 0;
};

/// Reads MSB-first bits from a byte stream.
class StreamBitReader : public BitReader {
public:
    explicit StreamBitReader(std::istream& in) : in_(&in) {}

protected:
    std::optional<int> next_bit() override;

private:
    std::istream* in_;
    int cur_ = 0;
    int avail_ = 0;
};

/// Replays a BitSequence bit for bit (not byte aligned).
class SequenceBitReader : public BitReader {
public:
    explicit SequenceBitReader(BitSequence bits) : bits_(std::move(bits)) {}

protected:
    std::optional<int> next_bit() override {
        if (pos_ >= bits_.size()) return std::nullopt;
        return bits_[pos_++];
    }

private:
    BitSequence bits_;
    std::size_t pos_ = 0;
};

/// Unbounded synthetic streams for tests (all-ones, periodic patterns, ...).
class GeneratorBitReader : public BitReader {
public:
    explicit GeneratorBitReader(std::function<std::optional<int>()> gen) : gen_(std::move(gen)) {}

protected:
    std::optional<int> next_bit() override { return gen_(); }

private:
    std::function<std::optional<int>()> gen_;
};

} // namespace vlx
