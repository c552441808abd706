#include <fstream>

#include "json.hpp"
#include "ttvi/decoupled_policy.hpp"

namespace ttvi {

namespace {
constexpr const char* kPolicyFormat = "ttvi-policy-1";
}

void save_policy_snapshot(const DecoupledPolicy& policy, std::uint64_t config_hash,
                          const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = kPolicyFormat;
  j["config_hash"] = config_hash;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& step : policy.steps) {
    auto modes = nlohmann::ordered_json::array();
    for (std::size_t q = 0; q < step.size(); ++q) {
      if (!step[q].has_value()) continue;
      nlohmann::ordered_json mj;
      mj["q"] = q;
      auto subsystems = nlohmann::ordered_json::array();
      for (const auto& slice : step[q]->per_subsystem) subsystems.push_back(slice.action);
      mj["subsystems"] = std::move(subsystems);
      modes.push_back(std::move(mj));
    }
    steps.push_back(std::move(modes));
  }
  j["steps"] = std::move(steps);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy snapshot '" + path + "'");
  out << j.dump(2) << "\n";
}

DecoupledPolicy load_policy_snapshot(const std::string& path, std::uint64_t* config_hash) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy snapshot '" + path + "'");
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != kPolicyFormat)
    throw std::runtime_error("unsupported policy snapshot format in '" + path + "'");
  if (config_hash != nullptr) *config_hash = j.at("config_hash").get<std::uint64_t>();
  DecoupledPolicy policy;
  for (const auto& step : j.at("steps")) {
    PolicyStepSlices slices;
    for (const auto& mj : step) {
      auto q = mj.at("q").get<std::size_t>();
      if (slices.size() <= q) slices.resize(q + 1);
      ModeSlices ms;
      for (const auto& actions : mj.at("subsystems")) {
        PolicySlice slice;
        slice.action = actions.get<std::vector<std::uint32_t>>();
        ms.per_subsystem.push_back(std::move(slice));
      }
      slices[q] = std::move(ms);
    }
    policy.steps.push_back(std::move(slices));
  }
  return policy;
}

}  // namespace ttvi
