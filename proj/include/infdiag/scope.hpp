#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace infdiag {

class Diagram;

/// An ordered list of variables with their outcome counts. Configurations
/// are enumerated in row-major order (first variable slowest).
class Scope {
 public:
  Scope() = default;
  Scope(std::vector<std::string> ids, std::vector<std::size_t> sizes);

  static Scope of(const Diagram& diagram, std::vector<std::string> ids);

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t width() const noexcept { return ids_.size(); }
  std::size_t count() const noexcept { return count_; }
  std::optional<std::size_t> position(std::string_view id) const;

  std::vector<std::size_t> decode(std::size_t index) const;
  std::size_t encode(std::span<const std::size_t> digits) const;

  /// Calls fn(digits) for every configuration in row-major order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    std::vector<std::size_t> digits(ids_.size(), 0);
    for (std::size_t n = 0; n < count_; ++n) {
      fn(std::span<const std::size_t>(digits));
      for (std::size_t i = digits.size(); i-- > 0;) {
        if (++digits[i] < sizes_[i]) break;
        digits[i] = 0;
      }
    }
  }

 private:
  std::vector<std::string> ids_;
  std::vector<std::size_t> sizes_;
  std::size_t count_ = 1;
};

/// Maps configurations of an outer scope to row indices of an inner id list
/// whose variables all appear in the outer scope.
class Projection {
 public:
  Projection(const Scope& outer, const Scope& inner);

  std::size_t operator()(std::span<const std::size_t> outer_digits) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < positions_.size(); ++i) index += outer_digits[positions_[i]] * strides_[i];
    return index;
  }

 private:
  std::vector<std::size_t> positions_;
  std::vector<std::size_t> strides_;
};

}  // namespace infdiag
