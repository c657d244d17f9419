#include "fxctl/cli.hpp"

int main(int argc, char** argv) { return fxctl::cli_main(argc, argv); }
