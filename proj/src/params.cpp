#include "kws/params.hpp"

#include "kws/errors.hpp"
#include "kws/ops.hpp"

namespace kws {

Tensor ParamStore::add(const std::string& name, Tensor t) {
  auto [it, inserted] = entries.emplace(name, std::move(t));
  if (!inserted) throw ContractError("ParamStore: duplicate parameter '" + name + "'");
  return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = entries.find(name);
  if (it == entries.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw ContractError("ParamStore: unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& [name, t] : entries) n += t.size();
  return n;
}

void ParamStore::sgd_step(double lr) {
  for (auto& [name, t] : entries) sgd_update(t, lr);
}

}  // namespace kws
