#include "bsdekit/acceptance.hpp"

int main() {
    const auto results = bsdekit::acceptance::run_all("acceptance_out");
    return bsdekit::acceptance::all_pass(results) ? 0 : 1;
}
