#pragma once

#include "dfto/types.hpp"

#include <string>

namespace dfto {

// On-disk scenario document: the scenario plus optional solver overrides.
// Versioned JSON; angles are degrees at this interface, radians inside.
struct ScenarioFile {
  std::string name;
  Scenario scenario;
  SolverConfig config;
};

inline constexpr int kScenarioFormatVersion = 1;

ScenarioFile scenarioFromJsonText(const std::string& text);
std::string scenarioToJsonText(const ScenarioFile& file);

// Throws InvalidScenarioError on unreadable files, malformed JSON, an
// unsupported version, or a scenario that fails validation.
ScenarioFile loadScenarioFile(const std::string& path);
void saveScenarioFile(const ScenarioFile& file, const std::string& path);

}  // namespace dfto
