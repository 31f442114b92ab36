#include "cli.hpp"

int main(int argc, char** argv) { return owmm::run_cli(argc, argv); }
