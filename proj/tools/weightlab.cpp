#include "weightlab/cli.hpp"

int main(int argc, char** argv) { return weightlab::cli::main(argc, argv); }
