#include "cli_app.hpp"

int main(int argc, char** argv) { return rfidloc::cli::run(argc, argv); }
