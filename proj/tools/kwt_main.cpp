#include "kwt/cli.hpp"

int main(int argc, char** argv) { return kwt::run_cli(argc, argv); }
