#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bintopo/core/optimizer.hpp"
#include "bintopo/core/params.hpp"

namespace bintopo {

// Builds an optimizer by name: random, duct, ea, grad, iql, bac, bppo.
// Reads its hyperparameters from `params`; unknown names throw ConfigError.
std::unique_ptr<Optimizer> make_optimizer(const std::string& name, Params& params);

const std::vector<std::string>& optimizer_names();

}  // namespace bintopo
