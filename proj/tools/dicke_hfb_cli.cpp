#include "cli.hpp"

int main(int argc, char** argv) { return dicke::cli::run(argc, argv); }
