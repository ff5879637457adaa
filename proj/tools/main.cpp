#include "punct/cli.hpp"

int main(int argc, char** argv) { return punct::cli_main(argc, argv); }
