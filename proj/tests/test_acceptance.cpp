// Acceptance suite: runs the full validation registry (acceptance criteria
// plus module invariants) and prints one pass/fail line per check.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ghostflow/validate.hpp"

#include <iostream>

using namespace ghostflow;

TEST_CASE("acceptance: validation registry") {
    CheckContext ctx;
    for (const Check& check : validation_registry()) {
        CheckResult result;
        try {
            result = check.fn(ctx);
        } catch (const std::exception& e) {
            result = {check.name, false, std::string("exception: ") + e.what()};
        }
        std::cout << (result.pass ? "[PASS] " : "[FAIL] ") << result.name << " - "
                  << result.detail << std::endl;
        INFO(result.name << ": " << result.detail);
        CHECK_MESSAGE(result.pass, result.name);
    }
}
