#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace levybsde {

/// Dense (node x path) table stored node-major, so that one time slice
/// across all paths is contiguous. Every backward step of the solver works
/// on whole rows.
class NodeMatrix {
 public:
  NodeMatrix() = default;
  NodeMatrix(std::size_t nodes, std::size_t paths, double fill = 0.0)
      : nodes_(nodes), paths_(paths), data_(nodes * paths, fill) {}

  std::size_t nodes() const { return nodes_; }
  std::size_t paths() const { return paths_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t node, std::size_t path) {
    assert(node < nodes_ && path < paths_);
    return data_[node * paths_ + path];
  }
  double operator()(std::size_t node, std::size_t path) const {
    assert(node < nodes_ && path < paths_);
    return data_[node * paths_ + path];
  }

  std::span<double> row(std::size_t node) {
    assert(node < nodes_);
    return {data_.data() + node * paths_, paths_};
  }
  std::span<const double> row(std::size_t node) const {
    assert(node < nodes_);
    return {data_.data() + node * paths_, paths_};
  }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  friend bool operator==(const NodeMatrix&, const NodeMatrix&) = default;

 private:
  std::size_t nodes_ = 0;
  std::size_t paths_ = 0;
  std::vector<double> data_;
};

}  // namespace levybsde
