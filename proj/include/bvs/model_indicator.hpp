#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bvs {

/// Inclusion vector gamma over p candidate covariates with a cached popcount.
class ModelIndicator {
public:
    ModelIndicator() = default;
    explicit ModelIndicator(std::size_t p);

    static ModelIndicator from_indices(std::size_t p, const std::vector<std::size_t>& indices);
    /// Low p bits of `bits`; covariate j is bit j. Only valid for p <= 64.
    static ModelIndicator from_bits(std::size_t p, std::uint64_t bits);

    std::size_t size() const noexcept { return p_; }
    std::size_t k() const noexcept { return k_; }

    bool test(std::size_t j) const noexcept { return (words_[j >> 6] >> (j & 63)) & 1u; }
    void set(std::size_t j, bool value) noexcept;
    void flip(std::size_t j) noexcept;

    std::vector<std::size_t> indices() const;

    /// Hex digits, most significant first; covariate j is bit j.
    std::string to_hex() const;

    bool is_subset_of(const ModelIndicator& other) const noexcept;

    friend bool operator==(const ModelIndicator& a, const ModelIndicator& b) noexcept {
        return a.p_ == b.p_ && a.words_ == b.words_;
    }
    /// Lexicographic order on (gamma_1, ..., gamma_p) read as a 0/1 string.
    friend bool operator<(const ModelIndicator& a, const ModelIndicator& b) noexcept;

    std::size_t hash() const noexcept;

private:
    std::size_t p_ = 0;
    std::size_t k_ = 0;
    std::vector<std::uint64_t> words_;
};

struct ModelIndicatorHash {
    std::size_t operator()(const ModelIndicator& m) const noexcept { return m.hash(); }
};

}  // namespace bvs
