#include "commands.hpp"

int main(int argc, char** argv) { return hdm::cli::run(argc, argv); }
