#ifndef SAGTWIN_ARTIFACTS_HPP
#define SAGTWIN_ARTIFACTS_HPP

#include <string>

#include "sagtwin/fuzzy.hpp"
#include "sagtwin/narx.hpp"
#include "sagtwin/statespace.hpp"

namespace sagtwin::artifacts {

inline constexpr int kFormatVersion = 1;

void save_statespace(const std::string& path, const regulatory::StateSpaceModel& model);
regulatory::StateSpaceModel load_statespace(const std::string& path);

void save_narx(const std::string& path, const narx::NarxModel& model);
narx::NarxModel load_narx(const std::string& path);

void save_rulebase(const std::string& path, const expert::FuzzyRuleBase& rulebase);
expert::FuzzyRuleBase load_rulebase(const std::string& path);

}  // namespace sagtwin::artifacts

#endif  // SAGTWIN_ARTIFACTS_HPP
