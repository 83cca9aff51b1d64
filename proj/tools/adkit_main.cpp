#include "adkit/cli.hpp"

int main(int argc, char** argv) {
    return adkit::cli::run(argc, argv);
}
