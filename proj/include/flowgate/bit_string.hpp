#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace flowgate {

/// Fixed-width bit string. Positions, velocities and feature masks of the
/// binary swarm are all of this type.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t width, bool value = false) : bits_(width, value ? 1 : 0) {}

    /// Parses a string of '0'/'1' characters, most significant (index 0) first.
    static BitString from_string(std::string_view text);
    static BitString ones(std::size_t width) { return BitString(width, true); }

    std::size_t size() const noexcept { return bits_.size(); }
    bool test(std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool value = true) { bits_[i] = value ? 1 : 0; }
    void flip(std::size_t i) { bits_[i] ^= 1; }

    std::size_t popcount() const noexcept;
    bool none() const noexcept { return popcount() == 0; }
    bool any() const noexcept { return !none(); }

    /// Indices of set bits in ascending order.
    std::vector<int> indices() const;
    std::string to_string() const;

    /// The bits as a 0/1 real vector.
    Eigen::VectorXd to_vector() const;

    BitString& operator^=(const BitString& other);
    BitString& operator|=(const BitString& other);
    BitString& operator&=(const BitString& other);

    friend BitString operator^(BitString a, const BitString& b) { return a ^= b; }
    friend BitString operator|(BitString a, const BitString& b) { return a |= b; }
    friend BitString operator&(BitString a, const BitString& b) { return a &= b; }
    friend bool operator==(const BitString&, const BitString&) = default;
    friend auto operator<=>(const BitString&, const BitString&) = default;

    /// Hamming distance.
    friend std::size_t distance(const BitString& a, const BitString& b);

private:
    std::vector<std::uint8_t> bits_;
};

using FeatureMask = BitString;

} // namespace flowgate
