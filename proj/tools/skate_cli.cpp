#include "skate/cli.hpp"

int main(int argc, char** argv) { return skate::run_cli(argc, argv); }
