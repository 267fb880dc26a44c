#include "moo/acceptance.hpp"
#include "moo/runner.hpp"

int main(int argc, char** argv) {
  return moo::cli_main(argc, argv, &moo::acceptance::oracle_main);
}
