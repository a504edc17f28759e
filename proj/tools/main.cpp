#include "projcvm/cli.hpp"

int main(int argc, char** argv) { return projcvm::cli_main(argc, argv); }
