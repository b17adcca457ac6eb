#include "ks2/cli.hpp"

int main(int argc, char** argv) { return ks2::cli::main(argc, argv); }
