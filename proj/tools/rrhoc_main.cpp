#include "rrhoc/cli.hpp"

int main(int argc, char** argv) { return rrhoc::run_cli(argc, argv); }
