#include "ihm/cli.hpp"

int main(int argc, char** argv) { return ihm::cli::run(argc, argv); }
