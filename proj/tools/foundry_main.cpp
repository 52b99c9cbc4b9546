#include <string>
#include <vector>

#include "foundry/cli/commands.h"

int main(int argc, char** argv) {
  return foundry::cli::dispatch(std::vector<std::string>(argv, argv + argc));
}
