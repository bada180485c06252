#include "bvs/model_indicator.hpp"

#include <bit>
#include <cassert>

namespace bvs {

ModelIndicator::ModelIndicator(std::size_t p) : p_(p), words_((p + 63) / 64, 0) {}

ModelIndicator ModelIndicator::from_indices(std::size_t p, const std::vector<std::size_t>& indices) {
    ModelIndicator m(p);
    for (auto j : indices) m.set(j, true);
    return m;
}

ModelIndicator ModelIndicator::from_bits(std::size_t p, std::uint64_t bits) {
    assert(p <= 64);
    ModelIndicator m(p);
    if (p == 0) return m;
    if (p < 64) bits &= (std::uint64_t{1} << p) - 1;
    m.words_[0] = bits;
    m.k_ = static_cast<std::size_t>(std::popcount(bits));
    return m;
}

void ModelIndicator::set(std::size_t j, bool value) noexcept {
    if (test(j) != value) flip(j);
}

void ModelIndicator::flip(std::size_t j) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (j & 63);
    auto& w = words_[j >> 6];
    w ^= mask;
    if (w & mask)
        ++k_;
    else
        --k_;
}

std::vector<std::size_t> ModelIndicator::indices() const {
    std::vector<std::size_t> out;
    out.reserve(k_);
    for (std::size_t w = 0; w < words_.size(); ++w) {
        auto bits = words_[w];
        while (bits) {
            const int b = std::countr_zero(bits);
            out.push_back(w * 64 + static_cast<std::size_t>(b));
            bits &= bits - 1;
        }
    }
    return out;
}

std::string ModelIndicator::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    const std::size_t n_digits = p_ == 0 ? 1 : (p_ + 3) / 4;
    std::string out(n_digits, '0');
    for (std::size_t d = 0; d < n_digits; ++d) {
        const std::size_t bit = 4 * d;
        const unsigned nibble = static_cast<unsigned>((words_.empty() ? 0 : words_[bit >> 6] >> (bit & 63)) & 0xF);
        out[n_digits - 1 - d] = digits[nibble];
    }
    return out;
}

bool ModelIndicator::is_subset_of(const ModelIndicator& other) const noexcept {
    if (p_ != other.p_) return false;
    for (std::size_t w = 0; w < words_.size(); ++w)
        if (words_[w] & ~other.words_[w]) return false;
    return true;
}

bool operator<(const ModelIndicator& a, const ModelIndicator& b) noexcept {
    if (a.p_ != b.p_) return a.p_ < b.p_;
    // The first differing covariate decides; a 0 there sorts first.
    for (std::size_t w = 0; w < a.words_.size(); ++w) {
        const auto diff = a.words_[w] ^ b.words_[w];
        if (diff) {
            const auto lowest = diff & (~diff + 1);
            return (a.words_[w] & lowest) == 0;
        }
    }
    return false;
}

std::size_t ModelIndicator::hash() const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ p_;
    for (auto w : words_) {
        h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h ^ (h >> 33));
}

}  // namespace bvs
