#include "tricycle/cli.hpp"

int main(int argc, char** argv) { return tricycle::run_cli(argc, argv); }
