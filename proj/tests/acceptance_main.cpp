#include <cstdio>
#include <cstring>

#include "magpack/harness.hpp"

// One PASS/FAIL line per criterion. Arguments restrict the run to the given ids.
int main(int argc, char** argv) {
    magpack::AcceptanceOptions opt;
    for (int i = 1; i < argc; ++i) opt.only.emplace_back(argv[i]);
    const auto results = magpack::run_acceptance(opt);
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
    return failed == 0 ? 0 : 1;
}
