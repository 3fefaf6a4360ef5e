#include "namesim/cli.hpp"

int main(int argc, char** argv) { return namesim::cli::run(argc, argv); }
