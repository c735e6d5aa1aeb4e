#include "flowgate/bit_string.hpp"

#include <cassert>
#include <numeric>

#include "flowgate/error.hpp"

namespace flowgate {

BitString BitString::from_string(std::string_view text)
{
    BitString b(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '0' && text[i] != '1')
            throw DataError("bit string contains '" + std::string(1, text[i]) + "'");
        b.bits_[i] = text[i] == '1';
    }
    return b;
}

std::size_t BitString::popcount() const noexcept
{
    return std::accumulate(bits_.begin(), bits_.end(), std::size_t{0});
}

std::vector<int> BitString::indices() const
{
    std::vector<int> out;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i])
            out.push_back(static_cast<int>(i));
    return out;
}

std::string BitString::to_string() const
{
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i])
            s[i] = '1';
    return s;
}

Eigen::VectorXd BitString::to_vector() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(bits_.size()));
    for (std::size_t i = 0; i < bits_.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = bits_[i];
    return v;
}

BitString& BitString::operator^=(const BitString& other)
{
    assert(size() == other.size());
    for (std::size_t i = 0; i < bits_.size(); ++i)
        bits_[i] ^= other.bits_[i];
    return *this;
}

BitString& BitString::operator|=(const BitString& other)
{
    assert(size() == other.size());
    for (std::size_t i = 0; i < bits_.size(); ++i)
        bits_[i] |= other.bits_[i];
    return *this;
}

BitString& BitString::operator&=(const BitString& other)
{
    assert(size() == other.size());
    for (std::size_t i = 0; i < bits_.size(); ++i)
        bits_[i] &= other.bits_[i];
    return *this;
}

std::size_t distance(const BitString& a, const BitString& b)
{
    assert(a.size() == b.size());
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.bits_.size(); ++i)
        d += a.bits_[i] != b.bits_[i];
    return d;
}

} // namespace flowgate
