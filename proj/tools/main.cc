#include "cli.h"

int main(int argc, char** argv) { return adspeech::cli::run(argc, argv); }
