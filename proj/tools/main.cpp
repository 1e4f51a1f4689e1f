#include "metricproto/cli.hpp"

int main(int argc, char** argv) {
    return metricproto::run_cli(argc, argv);
}
