#include "semicop/cli.hpp"

int main(int argc, char** argv) { return semicop::run_cli(argc, argv); }
