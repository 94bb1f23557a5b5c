#pragma once
#include <cstdio>

namespace te_tools {
bool run_acceptance_suite(std::FILE* out);
}
