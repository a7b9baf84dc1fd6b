#include <vector>

#include "impflow/pipeline/commands.hpp"

int main(int argc, char** argv) {
  return impflow::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
