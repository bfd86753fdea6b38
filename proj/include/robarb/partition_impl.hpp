#pragma once

#include <string>

#include "robarb/errors.hpp"

namespace robarb {

template <class Test>
std::uint64_t cell_index(const BoxPartition& partition,
                         const Eigen::Ref<const Eigen::VectorXd>& terminal, Test&& test) {
  const int d = partition.assets();
  if (terminal.size() != d) throw InputError("terminal dimension does not match partition");
  if (!partition.bounds.contains(terminal)) {
    throw OutOfBoundsError("terminal value outside the price box; widen delta or reduce epsilon");
  }
  std::uint64_t index = 0;
  for (int i = 0; i < partition.depth(); ++i) {
    bool inside = true;
    for (int j = 0; j < d; ++j)
      inside &= test(partition.lower(i, j), partition.upper(i, j), terminal[j]);
    index |= static_cast<std::uint64_t>(inside) << i;
  }
  return index;
}

}  // namespace robarb
