#include "centerout/dataset.hpp"

#include <stdexcept>

namespace centerout {

void validate(const Dataset& data) {
  if (data.dim < 1) throw std::invalid_argument("dataset: dim must be >= 1");
  if (data.points.empty() ||
      data.points.size() % static_cast<std::size_t>(data.dim) != 0)
    throw std::invalid_argument("dataset: point buffer shape mismatch");
  if (!all_finite(data.points))
    throw std::invalid_argument("dataset: points must be finite");
}

}  // namespace centerout
