#include "icf/cli.hpp"

int main(int argc, char** argv) { return icf::cli::main(argc, argv); }
