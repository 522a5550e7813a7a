#pragma once

#include "intentflow/actions/pool.hpp"

#include <vector>

namespace intentflow::service {

/// The stock action pool (no embeddings; the pool computes them on add).
std::vector<actions::ActionDescriptor> default_actions();

}  // namespace intentflow::service
