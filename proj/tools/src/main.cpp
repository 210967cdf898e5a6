#include <iostream>
#include <string>
#include <vector>

#include "panelmi_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return panelmi::cli::run(args, std::cout, std::cerr);
}
