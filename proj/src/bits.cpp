#include "vlx/bits.hpp"

namespace vlx {

BitSequence BitSequence::from_string(std::string_view s) {
    BitSequence out;
    out.bits_.reserve(s.size());
    for (char c : s) {
        if (c == '0')
            out.bits_.push_back(0);
        else if (c == '1')
            out.bits_.push_back(1);
        else
            throw ConfigError("bit string may contain only '0'/'1', got '" + std::string(1, c) + "'");
    }
    return out;
}

BitSequence BitSequence::from_u64(std::uint64_t v, std::size_t n) {
    if (n > 64) throw ConfigError("from_u64 supports at most 64 bits");
    BitSequence out;
    out.bits_.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.bits_[i] = static_cast<std::uint8_t>((v >> (n - 1 - i)) & 1u);
    return out;
}

std::uint64_t BitSequence::to_u64() const {
    if (size() > 64) throw ConfigError("to_u64 supports at most 64 bits");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < size(); ++i) v = (v << 1) | bits_[i];
    return v;
}

void BitSequence::push_back(int bit) {
    bits_.push_back(static_cast<std::uint8_t>(bit ? 1 : 0));
}

void BitSequence::append(const BitSequence& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitSequence BitSequence::prefix(std::size_t n) const {
    BitSequence out;
    out.bits_.assign(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

std::string BitSequence::to_string() const {
    std::string s;
    s.reserve(size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

std::size_t BitSequence::count_ones() const {
    std::size_t c = 0;
    for (auto b : bits_) c += b;
    return c;
}

bool BitSequence::is_prefix_of(const BitSequence& other) const {
    if (size() > other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
        if (bits_[i] != other.bits_[i]) return false;
    return true;
}

PackedBits pack(const BitSequence& bits) {
    PackedBits out;
    out.bit_count = bits.size();
    out.bytes.assign((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out.bytes[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    return out;
}

BitSequence unpack(const std::vector<std::uint8_t>& bytes, std::size_t bit_count) {
    if (bit_count > bytes.size() * 8) throw ConfigError("unpack: bit count exceeds byte buffer");
    BitSequence out;
    for (std::size_t i = 0; i < bit_count; ++i)
        out.push_back((bytes[i / 8] >> (7 - i % 8)) & 1);
    return out;
}

BitSequence BitReader::read_bits(std::size_t n) {
    BitSequence out;
    for (std::size_t i = 0; i < n; ++i) {
        auto b = read();
        if (!b) throw StreamExhausted("input ended after " + std::to_string(i) + " of " + std::to_string(n) + " bits");
        out.push_back(*b);
    }
    return out;
}

std::optional<int> StreamBitReader::next_bit() {
    if (avail_ == 0) {
        int c = in_->get();
        if (c == std::char_traits<char>::eof()) {
            if (in_->bad()) throw Error("I/O failure on input stream");
            return std::nullopt;
        }
        cur_ = c;
        avail_ = 8;
    }
    --avail_;
    return (cur_ >> avail_) & 1;
}

} // namespace vlx
