#include "bintopo/optim/registry.hpp"

#include "bintopo/core/errors.hpp"
#include "bintopo/optim/baselines.hpp"
#include "bintopo/optim/neural.hpp"

namespace bintopo {

const std::vector<std::string>& optimizer_names() {
  static const std::vector<std::string> names{"random", "duct", "ea", "grad", "iql", "bac", "bppo"};
  return names;
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& name, Params& params) {
  if (name == "random") return std::make_unique<RandomSearch>(RandomSearch::from_params(params));
  if (name == "duct") return std::make_unique<Duct>(DuctConfig::from_params(params));
  if (name == "ea") return std::make_unique<EvolutionaryAlgorithm>(EaConfig::from_params(params));
  if (name == "grad") return std::make_unique<GradientDescent>(GradDescConfig::from_params(params));
  if (name == "iql") return std::make_unique<IndependentQ>(IqlConfig::from_params(params));
  if (name == "bac") return std::make_unique<BanditActorCritic>(BacConfig::from_params(params));
  if (name == "bppo") return std::make_unique<BanditPPO>(BppoConfig::from_params(params));
  std::string known;
  for (const auto& n : optimizer_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown algorithm '" + name + "' (known: " + known + ")");
}

}  // namespace bintopo
