#include "floqstab/algebra.hpp"

#include <iostream>
#include <mutex>

namespace floqstab {

Factor Factor::boson(int n_max) {
  if (n_max < 1) throw ParameterError("boson truncation n_max must be >= 1");
  return {Kind::Boson, n_max};
}

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  for (const auto& f : factors_) {
    if (f.kind == Factor::Kind::Boson && f.truncation < 1)
      throw ParameterError("boson truncation n_max must be >= 1");
    total_dim_ *= f.dim();
  }
}

int SpaceLayout::index(std::span<const int> levels) const {
  if (levels.size() != factors_.size())
    throw DimensionError("expected " + std::to_string(factors_.size()) + " levels");
  int idx = 0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const int d = factors_[i].dim();
    if (levels[i] < 0 || levels[i] >= d)
      throw DimensionError("level " + std::to_string(levels[i]) + " outside factor " +
                           std::to_string(i));
    idx = idx * d + levels[i];
  }
  return idx;
}

std::vector<int> SpaceLayout::levels(int index) const {
  if (index < 0 || index >= total_dim_) throw DimensionError("basis index out of range");
  std::vector<int> out(factors_.size());
  for (std::size_t i = factors_.size(); i-- > 0;) {
    const int d = factors_[i].dim();
    out[i] = index % d;
    index /= d;
  }
  return out;
}

VectorC basis_state(const SpaceLayout& layout, std::span<const int> levels) {
  VectorC v = VectorC::Zero(layout.total_dim());
  v(layout.index(levels)) = 1.0;
  return v;
}

namespace {

std::mutex warning_mutex;

void default_warning(const std::string& m) { std::clog << "warning: " << m << '\n'; }

WarningHandler& warning_handler() {
  static WarningHandler h = default_warning;
  return h;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex);
  warning_handler() = handler ? std::move(handler) : default_warning;
}

void warn(const std::string& message) {
  std::lock_guard lock(warning_mutex);
  warning_handler()(message);
}

}  // namespace floqstab
