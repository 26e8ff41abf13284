#include "cli_app.hpp"

int main(int argc, char** argv) { return mobiscope::cli::run(argc, argv); }
