#include "infdiag/scope.hpp"

#include "infdiag/diagram.hpp"
#include "infdiag/error.hpp"

namespace infdiag {

Scope::Scope(std::vector<std::string> ids, std::vector<std::size_t> sizes)
    : ids_(std::move(ids)), sizes_(std::move(sizes)) {
  if (ids_.size() != sizes_.size()) throw invalid_argument("scope ids and sizes differ in length");
  for (auto s : sizes_) count_ *= s;
}

Scope Scope::of(const Diagram& diagram, std::vector<std::string> ids) {
  std::vector<std::size_t> sizes;
  sizes.reserve(ids.size());
  for (const auto& id : ids) {
    const Node& n = diagram.node(id);
    if (n.kind == NodeKind::Value) throw structural_error("value node '" + id + "' has no outcome space");
    sizes.push_back(n.space.size());
  }
  return Scope(std::move(ids), std::move(sizes));
}

std::optional<std::size_t> Scope::position(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return i;
  return std::nullopt;
}

std::vector<std::size_t> Scope::decode(std::size_t index) const {
  std::vector<std::size_t> digits(ids_.size(), 0);
  for (std::size_t i = ids_.size(); i-- > 0;) {
    digits[i] = index % sizes_[i];
    index /= sizes_[i];
  }
  return digits;
}

std::size_t Scope::encode(std::span<const std::size_t> digits) const {
  std::size_t index = 0;
  for (std::size_t i = 0; i < ids_.size(); ++i) index = index * sizes_[i] + digits[i];
  return index;
}

Projection::Projection(const Scope& outer, const Scope& inner) {
  positions_.resize(inner.width());
  strides_.resize(inner.width());
  std::size_t stride = 1;
  for (std::size_t i = inner.width(); i-- > 0;) {
    auto pos = outer.position(inner.ids()[i]);
    if (!pos) throw invalid_argument("projection variable '" + inner.ids()[i] + "' missing from outer scope");
    positions_[i] = *pos;
    strides_[i] = stride;
    stride *= inner.sizes()[i];
  }
}

}  // namespace infdiag
