#include <vector>

#include "forestz/experiment.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return forestz::run_cli(args);
}
