#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gplan {

/// PDDL text of a bundled domain: blocksworld, gripper, logistics or visitall.
std::string_view builtin_domain_text(std::string_view domain);
std::vector<std::string> builtin_domain_names();

}  // namespace gplan
