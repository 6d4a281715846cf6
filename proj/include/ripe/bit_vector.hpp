#ifndef RIPE_BIT_VECTOR_HPP
#define RIPE_BIT_VECTOR_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ripe {

/// Fixed-length bit vector over observations. Activation sets of rules are
/// stored this way so intersections reduce to word-wise AND + popcount.
class BitVector {
 public:
  using word_type = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  BitVector() = default;
  explicit BitVector(std::size_t size, bool value = false)
      : size_(size), words_((size + kWordBits - 1) / kWordBits, value ? ~word_type{0} : 0) {
    trim();
  }

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool test(std::size_t i) const noexcept {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
  }
  bool operator[](std::size_t i) const noexcept { return test(i); }

  void set(std::size_t i, bool value = true) noexcept {
    const word_type mask = word_type{1} << (i % kWordBits);
    if (value)
      words_[i / kWordBits] |= mask;
    else
      words_[i / kWordBits] &= ~mask;
  }

  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  bool none() const noexcept {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  BitVector& operator&=(const BitVector& other) {
    check_size(other);
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
    return *this;
  }
  BitVector& operator|=(const BitVector& other) {
    check_size(other);
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
    return *this;
  }

  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
  friend BitVector operator|(BitVector a, const BitVector& b) { return a |= b; }

  BitVector operator~() const {
    BitVector out(*this);
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
  }

  /// popcount(a & b) without materializing the intersection.
  static std::size_t and_count(const BitVector& a, const BitVector& b) {
    a.check_size(b);
    std::size_t c = 0;
    for (std::size_t k = 0; k < a.words_.size(); ++k)
      c += static_cast<std::size_t>(std::popcount(a.words_[k] & b.words_[k]));
    return c;
  }

  /// Calls f(i) for every set bit, in increasing index order.
  template <typename F>
  void for_each_set(F&& f) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      word_type w = words_[k];
      while (w) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(w));
        f(k * kWordBits + bit);
        w &= w - 1;
      }
    }
  }

  const std::vector<word_type>& words() const noexcept { return words_; }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  void trim() noexcept {
    const std::size_t tail = size_ % kWordBits;
    if (tail && !words_.empty()) words_.back() &= (word_type{1} << tail) - 1;
  }
  void check_size(const BitVector& other) const {
    if (other.size_ != size_) throw std::invalid_argument("BitVector size mismatch");
  }

  std::size_t size_ = 0;
  std::vector<word_type> words_;
};

}  // namespace ripe

#endif  // RIPE_BIT_VECTOR_HPP
