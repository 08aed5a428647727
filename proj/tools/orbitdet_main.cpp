#include <string>
#include <vector>

#include "orbitdet/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return orbitdet::run_cli(args);
}
