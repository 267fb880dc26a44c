#include "moo/acceptance.hpp"

#include <string>
#include <vector>

// Runs the named acceptance criteria (all of them when none are given) and
// prints one [PASS]/[FAIL] line each; exits nonzero when any fails.
int main(int argc, char** argv) {
  std::vector<std::string> names(argv + 1, argv + argc);
  if (names.empty()) names.emplace_back("all");
  return moo::acceptance::oracle_main(names);
}
