#include "wirebench/cli.hpp"

int main(int argc, char** argv) { return wirebench::run_cli(argc, argv); }
