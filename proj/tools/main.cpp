#include "cli.hpp"

int main(int argc, char** argv) { return convreg::cli::run(argc, argv); }
