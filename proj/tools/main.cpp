#include <string>
#include <vector>

#include "robustmargin/cli_app.hpp"

int main(int argc, char** argv) {
  return robustmargin::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
