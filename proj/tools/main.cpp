#include <string>
#include <vector>

#include "chainlift/cli/commands.hpp"

int main(int argc, char** argv) {
  return chainlift::cli::run_command(std::vector<std::string>(argv, argv + argc));
}
