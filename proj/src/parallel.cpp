#include "shssa/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shssa::parallel {

int max_threads()
{
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_max_threads(int n)
{
#ifdef _OPENMP
    omp_set_num_threads(std::max(1, n));
#else
    (void)n;
#endif
}

int apply_environment()
{
    if (const char* env = std::getenv("SHSSA_THREADS")) {
        try {
            const int n = std::stoi(env);
            set_max_threads(std::min(n, max_threads()));
        } catch (const std::exception&) {
            // unparsable values leave the default in place
        }
    }
    return max_threads();
}

} // namespace shssa::parallel
