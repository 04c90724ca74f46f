#include "coseg/numerics/parameters.hpp"

#include "coseg/error.hpp"
#include "coseg/numerics/rng.hpp"

namespace coseg {

Parameter& ParameterStore::add(const std::string& name, std::size_t rows, std::size_t cols) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter: " + name);
  index_[name] = params_.size();
  params_.push_back(std::make_unique<Parameter>(name, rows, cols));
  return *params_.back();
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *params_[it->second];
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->grad.fill(0.0);
}

void ParameterStore::zero_velocity() {
  for (auto& p : params_) p->velocity.fill(0.0);
}

void ParameterStore::init_uniform(Rng& rng, double scale) {
  for (auto& p : params_) {
    for (double& v : p->value.data()) v = rng.uniform(-scale, scale);
  }
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  for (auto& p : params_) {
    const Parameter& src = other.get(p->name);
    if (!src.value.same_shape(p->value)) {
      throw ShapeError("parameter " + p->name + ": shape " + src.value.shape_string() +
                       " does not match " + p->value.shape_string());
    }
    p->value = src.value;
  }
}

std::uint64_t fnv1a(std::span<const char> bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace coseg
